"""Network-flow application layer.

Per-node flow distributions arrive as already-fitted stable parameters. A
weighted topology links hidden flows X to observed aggregates Y, giving
Y = AX; inference then recovers the hidden flow laws.
"""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import (
    GenerationError,
    InvalidArgumentError,
    ModelParseError,
    ModelShapeError,
    ModelValidationError,
)
from .exact import forward_params
from .model import LinearStableModel, normalize_unit_diagonal, spectral_radius
from .stable import StableParams

__all__ = [
    "FlowParamRecord",
    "ObservationPartition",
    "FlowReport",
    "HISTOGRAM_BINS",
    "ingest_flow_params",
    "write_flow_params",
    "read_topology",
    "write_topology",
    "read_partition",
    "write_partition",
    "build_observation_model",
    "synth_planetlab_surrogate",
    "report",
]

FLOW_HEADER = ["node_id", "alpha", "beta", "gamma", "delta"]
TOPOLOGY_HEADER = ["src_id", "dst_id", "weight"]
HISTOGRAM_BINS = 40  # per-port bandwidth histogram a node would otherwise keep


@dataclass(frozen=True)
class FlowParamRecord:
    node_id: str
    alpha: float
    beta: float
    gamma: float
    delta: float

    @property
    def params(self):
        return StableParams(self.alpha, self.beta, self.gamma, self.delta)

    @classmethod
    def from_params(cls, node_id, p):
        return cls(str(node_id), p.alpha, p.beta, p.gamma, p.delta)


@dataclass(frozen=True)
class ObservationPartition:
    observed: frozenset
    hidden: frozenset

    def __post_init__(self):
        object.__setattr__(self, "observed", frozenset(map(str, self.observed)))
        object.__setattr__(self, "hidden", frozenset(map(str, self.hidden)))
        both = self.observed & self.hidden
        if both:
            raise ModelValidationError(f"nodes both observed and hidden: {sorted(both)}")


def ingest_flow_params(path):
    """Read a flow CSV with header node_id,alpha,beta,gamma,delta."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ModelValidationError(f"{path}: empty file, no flow records")
        missing = [h for h in FLOW_HEADER if h not in reader.fieldnames]
        if missing:
            raise ModelParseError(f"{path}: header lacks columns {missing}")
        records = []
        for row in reader:
            line = reader.line_num
            try:
                values = [float(row[h]) for h in FLOW_HEADER[1:]]
            except (TypeError, ValueError):
                raise ModelParseError(f"{path}, line {line}: non-numeric parameter in {row}") from None
            node = (row["node_id"] or "").strip()
            if not node:
                raise ModelParseError(f"{path}, line {line}: empty node_id")
            try:
                StableParams(*values)
            except InvalidArgumentError as exc:
                raise ModelValidationError(f"{path}, line {line} (node {node}): {exc}") from None
            records.append((line, FlowParamRecord(node, *values)))
    if not records:
        raise ModelValidationError(f"{path}: no flow records")
    dupes = [k for k, c in Counter(r.node_id for _, r in records).items() if c > 1]
    if dupes:
        raise ModelValidationError(f"{path}: duplicate node ids {sorted(dupes)}")
    alpha = Counter(r.alpha for _, r in records).most_common(1)[0][0]
    offenders = [f"line {line} ({r.node_id}): alpha={r.alpha:g}" for line, r in records if r.alpha != alpha]
    if offenders:
        raise ModelValidationError(f"{path}: mixed alpha (expected {alpha:g}); offenders: " + "; ".join(offenders))
    return [r for _, r in records]


def write_flow_params(records, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(FLOW_HEADER)
        for r in records:
            writer.writerow([r.node_id] + [f"{x:.17g}" for x in (r.alpha, r.beta, r.gamma, r.delta)])


def read_topology(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or any(h not in reader.fieldnames for h in TOPOLOGY_HEADER):
            raise ModelParseError(f"{path}: header must be src_id,dst_id,weight")
        edges = []
        for row in reader:
            try:
                edges.append((row["src_id"].strip(), row["dst_id"].strip(), float(row["weight"])))
            except (AttributeError, TypeError, ValueError):
                raise ModelParseError(f"{path}, line {reader.line_num}: bad edge {row}") from None
    return edges


def write_topology(edges, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TOPOLOGY_HEADER)
        for src, dst, w in edges:
            writer.writerow([src, dst, f"{w:.17g}"])


def read_partition(path):
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelParseError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    try:
        return ObservationPartition(d["observed"], d["hidden"])
    except (KeyError, TypeError):
        raise ModelParseError(f"{path}: expected {{'observed': [...], 'hidden': [...]}}") from None


def write_partition(partition, path):
    with open(path, "w") as fh:
        json.dump({"observed": sorted(partition.observed), "hidden": sorted(partition.hidden)}, fh, indent=1)
        fh.write("\n")


def build_observation_model(records, topology, partition):
    """Assemble Y = AX with Y the observed aggregates and X the hidden flows.

    Rows follow the observed ids and columns the hidden ids, both sorted;
    an edge between an observed and a hidden node adds its weight to the
    matching entry (in either direction). The diagonal must be positive so
    that the model can be normalized to a unit diagonal for Stable-Jacobi.
    """
    by_id = {r.node_id: r for r in records}
    nodes = set(by_id)
    if not partition.hidden:
        raise ModelValidationError("partition has no hidden nodes to infer")
    unknown = (partition.observed | partition.hidden) - nodes
    if unknown:
        raise ModelValidationError(f"partition names unknown nodes {sorted(unknown)}")
    observed = sorted(partition.observed)
    hidden = sorted(partition.hidden)
    if len(observed) != len(hidden):
        raise ModelShapeError(f"{len(observed)} observed vs {len(hidden)} hidden nodes; A must be square")
    row = {k: i for i, k in enumerate(observed)}
    col = {k: j for j, k in enumerate(hidden)}
    A = np.zeros((len(observed), len(hidden)))
    for src, dst, w in topology:
        for node in (src, dst):
            if node not in nodes:
                raise ModelValidationError(f"topology edge {src}->{dst} references unknown node {node!r}")
        if src in row and dst in col:
            A[row[src], col[dst]] += w
        elif dst in row and src in col:
            A[row[dst], col[src]] += w
        else:
            raise ModelShapeError(f"edge {src}->{dst} does not join an observed and a hidden node")
    normalize_unit_diagonal(A)
    alpha = by_id[observed[0]].alpha
    y_params = [by_id[k].params for k in observed]
    return LinearStableModel(alpha, A, y_params, side="y", labels=hidden)


def synth_planetlab_surrogate(n, target_rho, seed, degree=3):
    """Synthetic flow instance with the spectral profile of the real data.

    Hidden flows are Levy-like S(0.5, 1, gamma, delta) with gamma around
    1e-4 and delta around 1. Every observed node aggregates its own hidden
    flow (weight 1) plus ``degree`` random others, whose nonnegative weights
    are scaled so that rho(I - A) equals ``target_rho``. Observed laws are
    the exact forward laws. Returns ``(records, topology, partition)``.
    """
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise GenerationError(f"need n >= 2 nodes, got {n!r}")
    if not 0.0 < target_rho < 1.0:
        raise GenerationError(f"target_rho must lie in (0, 1), got {target_rho!r}")
    rng = np.random.default_rng(seed)
    k = min(degree, n - 1)
    W = np.zeros((n, n))
    for i in range(n):
        others = rng.choice(np.delete(np.arange(n), i), size=k, replace=False)
        W[i, np.sort(others)] = rng.uniform(0.5, 1.5, size=k)
    rho_w = spectral_radius(W, tol=1e-12)
    if rho_w <= 0:
        raise GenerationError("random structure has zero spectral radius; cannot reach target_rho")
    A = np.eye(n) + (target_rho / rho_w) * W

    width = len(str(n - 1))
    hidden = [f"h{i:0{width}d}" for i in range(n)]
    observed = [f"o{i:0{width}d}" for i in range(n)]
    gammas = 1e-4 * rng.lognormal(0.0, 0.5, size=n)
    deltas = 1.0 + 0.1 * rng.standard_normal(n)
    x_params = [StableParams(0.5, 1.0, g, d) for g, d in zip(gammas, deltas)]
    y_params = forward_params(LinearStableModel(0.5, A, x_params, side="x"))

    records = [FlowParamRecord.from_params(h, p) for h, p in zip(hidden, x_params)]
    records += [FlowParamRecord.from_params(o, p) for o, p in zip(observed, y_params)]
    topology = [
        (hidden[j], observed[i], float(A[i, j])) for i in range(n) for j in range(n) if A[i, j] != 0
    ]
    return records, topology, ObservationPartition(observed, hidden)


@dataclass
class FlowReport:
    rows: list
    alpha: float
    storage_note: str

    def to_tsv(self):
        out = io.StringIO()
        writer = csv.writer(out, delimiter="\t", lineterminator="\n")
        writer.writerow(["node_id", "alpha", "beta", "gamma", "delta", "flag"])
        for r in self.rows:
            nums = ["" if r[k] is None else f"{r[k]:.17g}" for k in ("beta", "gamma", "delta")]
            writer.writerow([r["node_id"], f"{self.alpha:.17g}"] + nums + [r["flag"]])
        return out.getvalue()

    def to_json(self):
        return json.dumps({"alpha": self.alpha, "rows": self.rows, "storage_note": self.storage_note}, indent=1)

    def format_table(self):
        lines = [f"{'node_id':>12} {'beta':>12} {'gamma':>12} {'delta':>12}  flag"]
        for r in self.rows:
            nums = ["-" if r[k] is None else f"{r[k]:.6g}" for k in ("beta", "gamma", "delta")]
            lines.append(f"{r['node_id']:>12} " + " ".join(f"{s:>12}" for s in nums) + f"  {r['flag']}")
        lines.append(self.storage_note)
        return "\n".join(lines)


def report(results, records):
    """Per-node summary table ordered by node id, nonphysical rows flagged."""
    labels = results.labels or [str(i) for i in range(len(results.x_given_y))]
    flags = results.flags or [""] * len(labels)
    alpha = records[0].alpha if records else next(p.alpha for p in results.x_given_y if p is not None)
    rows = []
    for label, law, flag in sorted(zip(labels, results.x_given_y, flags), key=lambda t: t[0]):
        if law is None:
            rows.append({"node_id": label, "beta": None, "gamma": None, "delta": None, "flag": flag or "nonphysical"})
        else:
            rows.append({"node_id": label, "beta": law.beta, "gamma": law.gamma, "delta": law.delta, "flag": flag})
    n = len(rows)
    note = (
        f"storage: {n} nodes x 4 stable parameters = {4 * n} values, "
        f"vs {n} x {HISTOGRAM_BINS} histogram bins = {HISTOGRAM_BINS * n} values"
    )
    return FlowReport(rows, alpha, note)
