"""Plain-text file formats: matrices, hierarchies, networks, and model files.

All numeric output uses shortest round-trip decimal representation so that
written files are stable and diffable.  Loaders fail with the path and
1-based line number of the offending record.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .additive import AdditiveModel, JointKernelSpec
from .errors import DataFormatError
from .hierarchy import HierarchyDag
from .kernels import KernelSpec
from .model import TrainedModel, fit
from .spaces import FlowNetwork, OutputSpace


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    Y: np.ndarray
    space: OutputSpace


def fmt(value) -> str:
    """Shortest decimal string that round-trips to the same float."""
    return repr(float(value))


def _read_lines(path) -> list[str]:
    try:
        with open(path, "r", encoding="ascii") as fh:
            raw = fh.read()
    except OSError as exc:
        raise DataFormatError(f"{path}: cannot read file: {exc}") from exc
    return raw.splitlines()


def load_matrix(path, dtype=float) -> np.ndarray:
    """One sample per line, space-separated numbers, rectangular."""
    lines = _read_lines(path)
    rows = []
    width = None
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            raise DataFormatError(f"{path}:{lineno}: blank line in matrix file")
        try:
            row = [dtype(tok) for tok in line.split()]
        except ValueError as exc:
            raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise DataFormatError(
                f"{path}:{lineno}: expected {width} columns, found {len(row)}")
        rows.append(row)
    if not rows:
        raise DataFormatError(f"{path}:1: file is empty")
    return np.array(rows, dtype=dtype)


def load_features(path) -> np.ndarray:
    return load_matrix(path, dtype=float)


def load_flows(path) -> np.ndarray:
    return load_matrix(path, dtype=float)


def load_binary_labels(path) -> np.ndarray:
    M = load_matrix(path, dtype=float)
    if not np.all(np.isin(M, (0.0, 1.0))):
        bad = int(np.argmax(~np.isin(M, (0.0, 1.0)).all(axis=1))) + 1
        raise DataFormatError(f"{path}:{bad}: binary labels must be 0/1")
    return M.astype(np.int64)


def load_permutations(path) -> np.ndarray:
    M = load_matrix(path, dtype=float)
    P = M.astype(np.int64)
    if np.any(P != M):
        raise DataFormatError(f"{path}:1: permutation ranks must be integers")
    d = P.shape[1]
    want = np.arange(1, d + 1)
    for i in range(P.shape[0]):
        if not np.array_equal(np.sort(P[i]), want):
            raise DataFormatError(f"{path}:{i + 1}: row is not a permutation of 1..{d}")
    return P


def save_matrix(path, M) -> None:
    M = np.atleast_2d(np.asarray(M))
    with open(path, "w", encoding="ascii") as fh:
        for row in M:
            if np.issubdtype(M.dtype, np.integer):
                fh.write(" ".join(str(int(v)) for v in row) + "\n")
            else:
                fh.write(" ".join(fmt(v) for v in row) + "\n")


def load_hierarchy(path) -> HierarchyDag:
    """One arc per line as ``parent child`` (0-based); d = 1 + max id."""
    lines = _read_lines(path)
    arcs = []
    max_id = -1
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        toks = line.split()
        if len(toks) != 2:
            raise DataFormatError(f"{path}:{lineno}: expected 'parent child'")
        try:
            p, c = int(toks[0]), int(toks[1])
        except ValueError as exc:
            raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
        if p < 0 or c < 0:
            raise DataFormatError(f"{path}:{lineno}: node ids must be nonnegative")
        if p == c:
            raise DataFormatError(f"{path}:{lineno}: self-loop arc ({p},{c})")
        arcs.append((p, c))
        max_id = max(max_id, p, c)
    if not arcs:
        raise DataFormatError(f"{path}:1: hierarchy file has no arcs")
    try:
        return HierarchyDag(d=max_id + 1, arcs=arcs)
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def save_hierarchy(path, G: HierarchyDag) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for p, c in G.arcs:
            fh.write(f"{p} {c}\n")


def load_network(path, require_acyclic: bool = True) -> FlowNetwork:
    """Header ``nodes N arcs M``, then M ``tail head`` lines, then N ``node b`` lines."""
    lines = _read_lines(path)
    if not lines:
        raise DataFormatError(f"{path}:1: file is empty")
    head = lines[0].split()
    if len(head) != 4 or head[0] != "nodes" or head[2] != "arcs":
        raise DataFormatError(f"{path}:1: expected header 'nodes N arcs M'")
    try:
        n_nodes, n_arcs = int(head[1]), int(head[3])
    except ValueError as exc:
        raise DataFormatError(f"{path}:1: {exc}") from exc
    if len(lines) < 1 + n_arcs + n_nodes:
        raise DataFormatError(f"{path}: expected {1 + n_arcs + n_nodes} lines, found {len(lines)}")
    arcs = []
    for i in range(n_arcs):
        lineno = 2 + i
        toks = lines[1 + i].split()
        if len(toks) != 2:
            raise DataFormatError(f"{path}:{lineno}: expected 'tail head'")
        try:
            t, h = int(toks[0]), int(toks[1])
        except ValueError as exc:
            raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
        if t == h:
            raise DataFormatError(f"{path}:{lineno}: self-loop arc ({t},{h})")
        arcs.append((t, h))
    b = [0.0] * n_nodes
    seen = [False] * n_nodes
    for i in range(n_nodes):
        lineno = 2 + n_arcs + i
        toks = lines[1 + n_arcs + i].split()
        if len(toks) != 2:
            raise DataFormatError(f"{path}:{lineno}: expected 'node b_value'")
        try:
            node, val = int(toks[0]), float(toks[1])
        except ValueError as exc:
            raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
        if not (0 <= node < n_nodes) or seen[node]:
            raise DataFormatError(f"{path}:{lineno}: bad or repeated node id {node}")
        seen[node] = True
        b[node] = val
    if abs(sum(b)) > 1e-9:
        raise DataFormatError(f"{path}: external inflows sum to {sum(b)}, expected 0")
    try:
        net = FlowNetwork(n_nodes=n_nodes, arcs=arcs, b=b)
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
    if require_acyclic and not net.is_acyclic:
        raise DataFormatError(f"{path}: cycle detected in network")
    return net


def save_network(path, net: FlowNetwork) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"nodes {net.n_nodes} arcs {net.n_arcs}\n")
        for t, h in net.arcs:
            fh.write(f"{t} {h}\n")
        for j, v in enumerate(net.b):
            fh.write(f"{j} {fmt(v)}\n")


MODEL_MAGIC = "ECRM-MODEL 1"


def _kernel_line(spec: KernelSpec) -> str:
    if spec.kind == "rbf":
        return f"kernel rbf {fmt(spec.gamma)}"
    return "kernel linear"


def _parse_kernel_line(path, lineno, line) -> KernelSpec:
    toks = line.split()
    if len(toks) >= 2 and toks[0] == "kernel" and toks[1] == "linear":
        return KernelSpec(kind="linear")
    if len(toks) == 3 and toks[0] == "kernel" and toks[1] == "rbf":
        return KernelSpec(kind="rbf", gamma=float(toks[2]))
    raise DataFormatError(f"{path}:{lineno}: bad kernel line {line!r}")


def save_model(path, model: TrainedModel) -> None:
    """Write the model file; the factorization is recomputed on load."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(MODEL_MAGIC + "\n")
        fh.write(_kernel_line(model.kernel) + "\n")
        fh.write(f"lambda {fmt(model.lam)} m {model.m} p {model.p} "
                 f"intercept {model.intercept_mode}\n")
        for row in model.inputs:
            fh.write(" ".join(fmt(v) for v in row) + "\n")
        Y = np.atleast_2d(np.asarray(model.labels))
        for row in Y:
            if np.issubdtype(Y.dtype, np.integer):
                fh.write(" ".join(str(int(v)) for v in row) + "\n")
            else:
                fh.write(" ".join(fmt(v) for v in row) + "\n")


def save_additive_model(path, model: AdditiveModel) -> None:
    """Additive variant: header, neighbor rule, hierarchy arcs, inputs, then
    per-sample coefficient rows (all on-values then all off-values)."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(MODEL_MAGIC + "\n")
        fh.write("variant additive\n")
        fh.write(_kernel_line(model.joint.base) + "\n")
        fh.write(f"lambda {fmt(model.lam)} m {model.m} d {model.d}\n")
        fh.write(f"neighbors {model.joint.neighbors}\n")
        fh.write(f"hierarchy {len(model.hierarchy.arcs)}\n")
        for p, c in model.hierarchy.arcs:
            fh.write(f"{p} {c}\n")
        fh.write(f"p {model.inputs.shape[1]}\n")
        for row in model.inputs:
            fh.write(" ".join(fmt(v) for v in row) + "\n")
        for i in range(model.m):
            on = model.alpha[i, :, 1]
            off = model.alpha[i, :, 0]
            fh.write(" ".join(fmt(v) for v in np.concatenate([on, off])) + "\n")


def load_model(path):
    """Load either model variant; returns TrainedModel or AdditiveModel."""
    lines = _read_lines(path)
    if not lines or lines[0] != MODEL_MAGIC:
        raise DataFormatError(f"{path}:1: not a model file (missing '{MODEL_MAGIC}')")
    if len(lines) >= 2 and lines[1] == "variant additive":
        return _load_additive(path, lines)
    return _load_base(path, lines)


def _floats(path, lineno, line, count) -> list[float]:
    toks = line.split()
    if len(toks) != count:
        raise DataFormatError(f"{path}:{lineno}: expected {count} values, found {len(toks)}")
    try:
        return [float(t) for t in toks]
    except ValueError as exc:
        raise DataFormatError(f"{path}:{lineno}: {exc}") from exc


def _load_base(path, lines) -> TrainedModel:
    if len(lines) < 3:
        raise DataFormatError(f"{path}: truncated model file")
    spec = _parse_kernel_line(path, 2, lines[1])
    toks = lines[2].split()
    if len(toks) != 8 or toks[0] != "lambda" or toks[2] != "m" or toks[4] != "p" or toks[6] != "intercept":
        raise DataFormatError(f"{path}:3: bad parameter line {lines[2]!r}")
    lam, m, p, intercept = float(toks[1]), int(toks[3]), int(toks[5]), toks[7]
    if len(lines) < 3 + 2 * m:
        raise DataFormatError(f"{path}: expected {3 + 2 * m} lines, found {len(lines)}")
    X = np.array([_floats(path, 4 + i, lines[3 + i], p) for i in range(m)])
    label_lines = lines[3 + m:3 + 2 * m]
    width = len(label_lines[0].split())
    Y = np.array([_floats(path, 4 + m + i, label_lines[i], width) for i in range(m)])
    if np.all(Y == np.round(Y)):
        Y = Y.astype(np.int64)
    return fit(spec, lam, X, Y, intercept_mode=intercept)


def _load_additive(path, lines) -> AdditiveModel:
    from .additive import AdditiveModel as AM

    spec = _parse_kernel_line(path, 3, lines[2])
    toks = lines[3].split()
    if len(toks) != 6 or toks[0] != "lambda" or toks[2] != "m" or toks[4] != "d":
        raise DataFormatError(f"{path}:4: bad parameter line {lines[3]!r}")
    lam, m, d = float(toks[1]), int(toks[3]), int(toks[5])
    ntoks = lines[4].split()
    if len(ntoks) != 2 or ntoks[0] != "neighbors":
        raise DataFormatError(f"{path}:5: bad neighbors line {lines[4]!r}")
    htoks = lines[5].split()
    if len(htoks) != 2 or htoks[0] != "hierarchy":
        raise DataFormatError(f"{path}:6: bad hierarchy line {lines[5]!r}")
    n_arcs = int(htoks[1])
    arcs = []
    for i in range(n_arcs):
        lineno = 7 + i
        t = lines[6 + i].split()
        if len(t) != 2:
            raise DataFormatError(f"{path}:{lineno}: expected 'parent child'")
        arcs.append((int(t[0]), int(t[1])))
    ptoks = lines[6 + n_arcs].split()
    if len(ptoks) != 2 or ptoks[0] != "p":
        raise DataFormatError(f"{path}:{7 + n_arcs}: bad feature-dim line")
    p = int(ptoks[1])
    base = 7 + n_arcs
    X = np.array([_floats(path, base + i + 1, lines[base + i], p) for i in range(m)])
    alpha = np.zeros((m, d, 2))
    for i in range(m):
        vals = _floats(path, base + m + i + 1, lines[base + m + i], 2 * d)
        alpha[i, :, 1] = vals[:d]
        alpha[i, :, 0] = vals[d:]
    G = HierarchyDag(d=d, arcs=arcs)
    return AM(alpha=alpha, joint=JointKernelSpec(base=spec, neighbors=ntoks[1]),
              lam=lam, hierarchy=G, inputs=X)
