import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_corr(rng, n):
    m = np.eye(n)
    iu = np.triu_indices(n, 1)
    m[iu] = np.tanh(0.5 * rng.standard_normal(len(iu[0])))
    return np.triu(m, 1) + np.triu(m, 1).T + np.eye(n)


def write_matrix_file(path, m, sep=","):
    with open(path, "w") as fh:
        for row in m:
            fh.write(sep.join(repr(float(v)) for v in row) + "\n")


@pytest.fixture
def write_cohort(tmp_path):
    """Write matrices + manifest (+ optional sheet text) and return paths."""

    def _write(mats, ids=None, sheet=None):
        ids = ids or [f"s{i + 1}" for i in range(len(mats))]
        (tmp_path / "m").mkdir(exist_ok=True)
        lines = ["subject_id,path"]
        for sid, m in zip(ids, mats):
            write_matrix_file(tmp_path / "m" / f"{sid}.txt", m)
            lines.append(f"{sid},m/{sid}.txt")
        manifest = tmp_path / "manifest.csv"
        manifest.write_text("\n".join(lines) + "\n")
        sheet_path = None
        if sheet is not None:
            sheet_path = tmp_path / "vars.csv"
            sheet_path.write_text(sheet)
        return manifest, sheet_path

    return _write
