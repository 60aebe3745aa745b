"""Reading connectivity matrices, node time series and variable sheets.

On-disk layout:

* a manifest CSV with header ``subject_id,path`` (paths relative to the
  manifest's directory are allowed);
* one delimited numeric text file per subject (comma or whitespace);
* a variable sheet CSV whose first column is ``subject_id``.
"""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

SYMMETRY_REPAIR_TOL = 1e-6


class IngestError(ValueError):
    pass


@dataclass(frozen=True)
class ConnectivityDataset:
    subjects: tuple
    node_labels: tuple
    matrices: tuple
    diagonal: str = "unit"

    @property
    def n_nodes(self):
        return len(self.node_labels)

    def matrix(self, subject):
        return self.matrices[self.subjects.index(subject)]

    def restrict(self, subjects):
        idx = [self.subjects.index(s) for s in subjects]
        return ConnectivityDataset(tuple(subjects), self.node_labels,
                                   tuple(self.matrices[i] for i in idx), self.diagonal)


@dataclass(frozen=True)
class TimeSeriesSet:
    subjects: tuple
    node_labels: tuple
    series: tuple

    @property
    def n_nodes(self):
        return len(self.node_labels)

    def restrict(self, subjects):
        idx = [self.subjects.index(s) for s in subjects]
        return TimeSeriesSet(tuple(subjects), self.node_labels,
                             tuple(self.series[i] for i in idx))


@dataclass(frozen=True)
class Column:
    name: str
    kind: str  # "continuous" or "binary"
    values: tuple  # floats (nan = missing) or str/None for binary
    levels: tuple = ()  # binary only, first-seen order

    def is_missing(self, i):
        v = self.values[i]
        if self.kind == "continuous":
            return np.isnan(v)
        return v is None

    def encoded(self):
        """Numeric view: continuous as-is, binary levels as -1/+1, missing as nan."""
        if self.kind == "continuous":
            return np.asarray(self.values, dtype=float)
        code = {self.levels[0]: -1.0, self.levels[1]: 1.0}
        return np.array([np.nan if v is None else code[v] for v in self.values])


@dataclass(frozen=True)
class VariableSheet:
    subjects: tuple
    columns: dict = field(default_factory=dict)

    def column(self, name):
        try:
            return self.columns[name]
        except KeyError:
            raise IngestError(f"variable sheet has no column {name!r}") from None

    def restrict(self, subjects):
        idx = [self.subjects.index(s) for s in subjects]
        cols = {}
        for name, col in self.columns.items():
            cols[name] = Column(col.name, col.kind, tuple(col.values[i] for i in idx), col.levels)
        return VariableSheet(tuple(subjects), cols)


@dataclass(frozen=True)
class AlignedCohort:
    subjects: tuple
    data: object  # ConnectivityDataset or TimeSeriesSet
    sheet: VariableSheet
    outcome: str
    dropped: tuple = ()  # (subject, reason)


def read_matrix(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise IngestError(f"cannot read matrix file {path}: {exc}") from exc
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        cells = line.replace(",", " ").split()
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            raise IngestError(f"{path}:{lineno}: non-numeric cell") from None
    if not rows:
        raise IngestError(f"{path}: empty matrix file")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise IngestError(f"{path}: ragged rows")
    return np.array(rows, dtype=float)


def write_matrix(path, m):
    with open(path, "w") as fh:
        for row in np.asarray(m):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_manifest(path):
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"subject_id", "path"} <= set(reader.fieldnames):
                raise IngestError(f"{path}: manifest needs header 'subject_id,path'")
            entries = [(row["subject_id"].strip(), row["path"].strip()) for row in reader]
    except OSError as exc:
        raise IngestError(f"cannot read manifest {path}: {exc}") from exc
    seen = set()
    out = []
    for sid, rel in entries:
        if sid in seen:
            raise IngestError(f"{path}: duplicate subject ID {sid!r}")
        seen.add(sid)
        p = Path(rel)
        out.append((sid, p if p.is_absolute() else path.parent / p))
    if not out:
        raise IngestError(f"{path}: manifest lists no subjects")
    return out


def _default_labels(n):
    return tuple(str(i + 1) for i in range(n))


def read_node_labels(path):
    labels = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if len(set(labels)) != len(labels):
        raise IngestError(f"{path}: duplicate node labels")
    return tuple(labels)


def load_connectivity_set(manifest_path, node_labels=None):
    """Load one square symmetric matrix per subject listed in the manifest.

    Asymmetries up to 1e-6 are repaired by averaging with the transpose;
    anything larger is an error.
    """
    matrices = []
    subjects = []
    diag_kinds = set()
    for sid, mpath in read_manifest(manifest_path):
        m = read_matrix(mpath)
        if m.shape[0] != m.shape[1]:
            raise IngestError(f"{mpath}: non-square matrix {m.shape[0]}x{m.shape[1]}")
        if not np.all(np.isfinite(m)):
            raise IngestError(f"{mpath}: non-finite entries")
        asym = np.max(np.abs(m - m.T))
        if asym > SYMMETRY_REPAIR_TOL:
            raise IngestError(f"{mpath}: asymmetry {asym:g} exceeds {SYMMETRY_REPAIR_TOL:g}")
        if asym > 0:
            m = (m + m.T) / 2.0
        d = np.diag(m)
        if np.allclose(d, 1.0, atol=1e-9):
            diag_kinds.add("unit")
        elif np.allclose(d, 0.0, atol=1e-9):
            diag_kinds.add("zero")
        else:
            raise IngestError(f"{mpath}: diagonal must be all ones or all zeros")
        m.setflags(write=False)
        matrices.append(m)
        subjects.append(sid)
    n = matrices[0].shape[0]
    for sid, m in zip(subjects, matrices):
        if m.shape[0] != n:
            raise IngestError(f"subject {sid}: {m.shape[0]} nodes, expected {n}")
    labels = tuple(node_labels) if node_labels is not None else _default_labels(n)
    if len(labels) != n:
        raise IngestError(f"{len(labels)} node labels for {n}-node matrices")
    diagonal = diag_kinds.pop() if len(diag_kinds) == 1 else "mixed"
    return ConnectivityDataset(tuple(subjects), labels, tuple(matrices), diagonal)


def load_time_series_set(manifest_path, node_labels=None):
    """Load one T x N series per subject (rows are samples)."""
    series = []
    subjects = []
    for sid, spath in read_manifest(manifest_path):
        ts = read_matrix(spath)
        if ts.shape[0] < 2:
            raise IngestError(f"{spath}: need at least 2 samples, got {ts.shape[0]}")
        if not np.all(np.isfinite(ts)):
            raise IngestError(f"{spath}: non-finite entries")
        ts.setflags(write=False)
        series.append(ts)
        subjects.append(sid)
    n = series[0].shape[1]
    for sid, ts in zip(subjects, series):
        if ts.shape[1] != n:
            raise IngestError(f"subject {sid}: {ts.shape[1]} nodes, expected {n}")
    labels = tuple(node_labels) if node_labels is not None else _default_labels(n)
    if len(labels) != n:
        raise IngestError(f"{len(labels)} node labels for {n}-node series")
    return TimeSeriesSet(tuple(subjects), labels, tuple(series))


def save_connectivity_set(dataset, directory):
    """Write matrices plus a manifest; returns the manifest path."""
    directory = Path(directory)
    (directory / "matrices").mkdir(parents=True, exist_ok=True)
    manifest = directory / "manifest.csv"
    with open(manifest, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["subject_id", "path"])
        for sid, m in zip(dataset.subjects, dataset.matrices):
            rel = f"matrices/{sid}.txt"
            write_matrix(directory / rel, m)
            w.writerow([sid, rel])
    return manifest


def _parse_number(cell):
    try:
        return float(cell)
    except ValueError:
        return None


def load_variable_sheet(path):
    """Parse a subject-by-variable CSV and infer a type for each column.

    A column whose non-empty cells all parse as numbers is continuous.
    Exactly two distinct non-numeric labels make it binary categorical.
    Empty cells are kept as missing.
    """
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise IngestError(f"cannot read variable sheet {path}: {exc}") from exc
    rows = [r for r in rows if any(c.strip() for c in r)]
    if len(rows) < 2:
        raise IngestError(f"{path}: empty sheet")
    header = [h.strip() for h in rows[0]]
    if header[0] != "subject_id":
        raise IngestError(f"{path}: first column must be 'subject_id'")
    if len(set(header)) != len(header):
        raise IngestError(f"{path}: duplicate column names")
    body = rows[1:]
    subjects = []
    for lineno, r in enumerate(body, 2):
        if len(r) != len(header):
            raise IngestError(f"{path}:{lineno}: expected {len(header)} cells, got {len(r)}")
        subjects.append(r[0].strip())
    if len(set(subjects)) != len(subjects):
        dup = next(s for s in subjects if subjects.count(s) > 1)
        raise IngestError(f"{path}: duplicate subject ID {dup!r}")

    columns = {}
    for j, name in enumerate(header[1:], 1):
        cells = [r[j].strip() for r in body]
        present = [c for c in cells if c != ""]
        numbers = [_parse_number(c) for c in present]
        if all(v is not None for v in numbers):
            vals = tuple(float("nan") if c == "" else float(c) for c in cells)
            columns[name] = Column(name, "continuous", vals)
            continue
        levels = []
        for c in present:
            if c not in levels:
                levels.append(c)
        if len(levels) > 2:
            raise IngestError(f"{path}: column {name!r} has more than two classes {levels[:5]}")
        if len(levels) < 2:
            raise IngestError(f"{path}: column {name!r} is categorical with a single level")
        vals = tuple(None if c == "" else c for c in cells)
        columns[name] = Column(name, "binary", vals, tuple(levels))
    return VariableSheet(tuple(subjects), columns)


def align_subjects(data, sheet, outcome):
    """Intersect a dataset with a variable sheet, keeping the dataset's order.

    Subjects without a sheet row, without a matrix, or with a missing
    outcome are dropped and listed in ``cohort.dropped``.
    """
    col = sheet.column(outcome)
    if all(col.is_missing(i) for i in range(len(sheet.subjects))):
        raise IngestError(f"outcome {outcome!r} is entirely missing")
    in_sheet = {s: i for i, s in enumerate(sheet.subjects)}
    in_data = set(data.subjects)
    keep = []
    dropped = []
    for s in data.subjects:
        if s not in in_sheet:
            dropped.append((s, "no sheet row"))
        elif col.is_missing(in_sheet[s]):
            dropped.append((s, f"missing outcome {outcome!r}"))
        else:
            keep.append(s)
    for s in sheet.subjects:
        if s not in in_data:
            dropped.append((s, "no matrix"))
    if not keep:
        raise IngestError("no subjects shared between data and variable sheet")
    for s, why in dropped:
        log.info("dropping subject %s: %s", s, why)
    return AlignedCohort(tuple(keep), data.restrict(keep), sheet.restrict(keep), outcome,
                         tuple(dropped))
