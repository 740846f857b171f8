"""Reading and writing graphs: whitespace edge lists, label CSVs, similarity matrices."""

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .model import Adjacency


@dataclass(frozen=True, eq=False)
class Graph:
    """An undirected simple graph read from disk.

    ``vertices[i]`` is the token of row ``i`` of ``A``. ``labels`` (1-based)
    and ``label_names`` are set when a label file was supplied;
    ``label_names[k - 1]`` is the community token behind label ``k``.
    """

    A: Adjacency
    vertices: list
    labels: np.ndarray = None
    label_names: list = None
    self_loops: int = 0
    duplicates: int = 0
    isolated_dropped: int = 0

    @property
    def n(self):
        return len(self.vertices)


def read_edges(path):
    """Parse an edge list into ``(edges, tokens_in_order, self_loops)``.

    One edge per line as two whitespace-separated tokens; blank lines and
    lines starting with ``#`` are skipped.
    """
    index, tokens, edges = {}, [], []
    loops = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected two vertex tokens, got {len(parts)}",
                                line=lineno)
            for tok in parts:
                if tok not in index:
                    index[tok] = len(tokens)
                    tokens.append(tok)
            u, v = index[parts[0]], index[parts[1]]
            if u == v:
                loops += 1
                continue
            edges.append((u, v))
    return edges, tokens, loops


def read_labels(path):
    """Read a ``vertex,label`` CSV (with header) into an ordered dict of tokens."""
    out = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"vertex", "label"} <= set(reader.fieldnames):
            raise DataError(f"{path}: header must contain 'vertex' and 'label' columns", line=1)
        for lineno, row in enumerate(reader, 2):
            v, lab = row["vertex"], row["label"]
            if v is None or lab is None or v.strip() == "" or lab.strip() == "":
                raise DataError(f"{path}:{lineno}: incomplete row", line=lineno)
            out[v.strip()] = lab.strip()
    return out


def encode_labels(tokens, mapping, path="labels"):
    """Turn label tokens for ``tokens`` into 1-based ints.

    Community ids follow the first appearance of each community token in
    ``mapping``. Raises :class:`DataError` naming every vertex without a label.
    """
    missing = [t for t in tokens if t not in mapping]
    if missing:
        shown = ", ".join(missing[:20]) + (" ..." if len(missing) > 20 else "")
        raise DataError(f"{path}: no label for {len(missing)} vertices: {shown}", offenders=missing)
    names = list(dict.fromkeys(mapping.values()))
    ids = {name: i + 1 for i, name in enumerate(names)}
    return np.array([ids[mapping[t]] for t in tokens], dtype=int), names


def load_edgelist(path, labels=None, drop_isolated=False):
    """Load an undirected graph from a whitespace edge list.

    Duplicate edges are collapsed and self-loops dropped (both counted).
    When a label CSV is given, labelled vertices that never appear in an
    edge are added as isolated vertices. ``drop_isolated`` removes every
    degree-0 vertex.
    """
    edges, tokens, loops = read_edges(path)
    mapping = None
    if labels is not None:
        mapping = read_labels(labels)
        seen = set(tokens)
        tokens += [t for t in mapping if t not in seen]
    n = len(tokens)
    A = np.zeros((n, n))
    for u, v in edges:
        A[u, v] = A[v, u] = 1.0
    duplicates = len(edges) - int(A.sum() // 2)

    dropped = 0
    if drop_isolated:
        keep = A.sum(axis=1) > 0
        dropped = int(n - keep.sum())
        A = A[np.ix_(keep, keep)]
        tokens = [t for t, k in zip(tokens, keep) if k]

    lab, names = None, None
    if mapping is not None:
        lab, names = encode_labels(tokens, mapping, labels)
    return Graph(A=Adjacency(A), vertices=tokens, labels=lab, label_names=names,
                 self_loops=loops, duplicates=duplicates, isolated_dropped=dropped)


def write_edgelist(A, path, vertices=None):
    """Write the upper triangle of ``A`` as an edge list (isolated vertices are lost)."""
    A = np.asarray(A)
    n = A.shape[0]
    names = [str(i) for i in range(n)] if vertices is None else [str(v) for v in vertices]
    rows, cols = np.nonzero(np.triu(A, 1))
    with open(path, "w", encoding="utf-8") as fh:
        for i, j in zip(rows, cols):
            fh.write(f"{names[i]} {names[j]}\n")


def write_labels(labels, path, vertices=None):
    labels = np.asarray(getattr(labels, "labels", labels))
    names = range(labels.size) if vertices is None else vertices
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["vertex", "label"])
        for v, lab in zip(names, labels):
            w.writerow([v, int(lab)])


def load_similarity(path, threshold):
    """Binarize a dense similarity matrix (``.npy`` or CSV) at ``threshold``.

    Entries strictly above the threshold become edges; the matrix is
    symmetrized first and the diagonal cleared. Vertex tokens are the row
    indices ``"0" .. "n-1"``.
    """
    path = Path(path)
    if path.suffix == ".npy":
        S = np.load(path)
    else:
        try:
            S = np.loadtxt(path, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise DataError(f"{path}: {exc}") from exc
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DataError(f"{path}: similarity matrix must be square, got shape {S.shape}")
    S = (S + S.T) / 2
    A = (S > threshold).astype(float)
    np.fill_diagonal(A, 0.0)
    return Graph(A=Adjacency(A), vertices=[str(i) for i in range(S.shape[0])])
