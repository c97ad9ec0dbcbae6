"""Configuration-driven experiment runner.

An experiment is a flat key = value text file naming a kind, a seed,
and kind-specific parameters. Running one produces CSV rows with a
fixed column set per kind (plus seed and wall_time on every row) and,
on request, an SVG line plot. Identical configs reproduce identical
data columns; wall_time is the one column excluded from comparisons.
"""

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bitmatrix import BitMatrix
from .errors import ValidationError
from .matio import load_matrix
from .netcode import butterfly, build_broadcast_code, load_network, maxflow, random_dag
from .rdcodec import LinearCode, rd_encode_multi
from .sparsify import distortion_rate, sparsify
from .svgplot import Series, save_plot
from .syndrome import design_joint_code, entry_zero_prob, structured_ldpc, wyner_pipeline

KINDS = ("density_vs_rate", "density_vs_repetitions", "ber_sweep", "rd_gap",
         "netcode_sparsify", "entry_probabilities")

COLUMNS = {
    "density_vs_rate": ("rate", "cols", "trials", "passes", "seeds", "density",
                        "dr_bound", "gauss_expect"),
    "density_vs_repetitions": ("rate", "trials", "passes", "seeds", "density",
                               "dr_bound"),
    "ber_sweep": ("p", "bits", "bit_errors", "ber", "converged_fraction"),
    "rd_gap": ("draws", "rate", "instances", "mean_distortion", "dr_bound"),
    "netcode_sparsify": ("terminal", "maxflow", "density_before", "density_after",
                         "symbols_before_pct", "symbols_after_pct"),
    "entry_probabilities": ("l", "lam", "samples", "empirical_zero_prob",
                            "analytic_zero_prob", "abs_error", "sigma"),
}
UNIVERSAL_COLUMNS = ("seed", "wall_time")
COMPARE_IGNORED = ("wall_time",)


@dataclass
class ExperimentConfig:
    """A parsed experiment file: kind, mandatory seed, raw parameters."""

    kind: str
    seed: int
    params: dict = field(default_factory=dict)
    csv_path: Optional[str] = None
    svg_path: Optional[str] = None


def parse_config(text: str) -> ExperimentConfig:
    """Parse flat key = value lines; '#' starts a comment."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValidationError(f"config line {lineno}: expected key = value, "
                                  f"got {stripped!r}")
        key, value = stripped.split("=", 1)
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ValidationError(f"config line {lineno}: empty key or value")
        if key in raw:
            raise ValidationError(f"config line {lineno}: duplicate key {key!r}")
        raw[key] = value
    kind = raw.pop("kind", None)
    if kind is None:
        raise ValidationError("config field 'kind': required")
    if kind not in KINDS:
        raise ValidationError(f"config field 'kind': unknown kind {kind!r}; "
                              f"expected one of {', '.join(KINDS)}")
    if "seed" not in raw:
        raise ValidationError("config field 'seed': required")
    seed = _parse_int("seed", raw.pop("seed"))
    csv_path = raw.pop("csv", None)
    svg_path = raw.pop("svg", None)
    return ExperimentConfig(kind=kind, seed=seed, params=raw,
                            csv_path=csv_path, svg_path=svg_path)


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def _parse_int(name: str, value) -> int:
    try:
        as_float = float(value)
        as_int = int(as_float)
    except (TypeError, ValueError):
        raise ValidationError(f"config field {name!r}: expected integer, got {value!r}")
    if as_int != as_float:
        raise ValidationError(f"config field {name!r}: expected integer, got {value!r}")
    return as_int


def _parse_float(name: str, value) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"config field {name!r}: expected number, got {value!r}")


def _parse_float_list(name: str, value) -> list:
    items = [v.strip() for v in str(value).split(",") if v.strip()]
    if not items:
        raise ValidationError(f"config field {name!r}: expected a comma list")
    return [_parse_float(name, v) for v in items]


def _parse_int_list(name: str, value) -> list:
    return [_parse_int(name, v) for v in str(value).split(",") if v.strip()]


def _parse_rates_map(name: str, value) -> dict:
    out = {}
    for item in str(value).split(","):
        item = item.strip()
        if not item:
            continue
        if ":" not in item:
            raise ValidationError(f"config field {name!r}: expected terminal:rate "
                                  f"pairs, got {item!r}")
        t, r = item.split(":", 1)
        out[_parse_int(name, t)] = _parse_float(name, r)
    if not out:
        raise ValidationError(f"config field {name!r}: expected terminal:rate pairs")
    return out


class _Params:
    """Typed accessors over the raw parameter dict; tracks unknown keys."""

    def __init__(self, config: ExperimentConfig):
        self._params = dict(config.params)
        self._seen = set()

    def _fetch(self, name, default):
        self._seen.add(name)
        if name in self._params:
            return self._params[name]
        if default is _REQUIRED:
            raise ValidationError(f"config field {name!r}: required")
        return default

    def get_int(self, name, default=None):
        v = self._fetch(name, default)
        return v if v is default else _parse_int(name, v)

    def get_float(self, name, default=None):
        v = self._fetch(name, default)
        return v if v is default else _parse_float(name, v)

    def get_str(self, name, default=None):
        return self._fetch(name, default)

    def get_float_list(self, name, default=None):
        v = self._fetch(name, default)
        return v if v is default else _parse_float_list(name, v)

    def get_int_list(self, name, default=None):
        v = self._fetch(name, default)
        return v if v is default else _parse_int_list(name, v)

    def finish(self):
        unknown = set(self._params) - self._seen
        if unknown:
            raise ValidationError(
                f"unknown config fields: {', '.join(sorted(unknown))}")


class _Required:
    def __repr__(self):
        return "<required>"


_REQUIRED = _Required()


def _stream(seed: int, *key) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


def _stream_seed(seed: int, *key) -> int:
    return int(np.random.SeedSequence(
        entropy=seed, spawn_key=key).generate_state(1, np.uint64)[0] >> 1)


def _gauss_expect(n: int, cols: int) -> float:
    # Jordan-reduced [I; R] pattern: identity block plus a half-dense remainder
    return 1.0 / n + (1.0 - cols / n) / 2.0


def _random_full_rank(n: int, cols: int, gen: np.random.Generator) -> BitMatrix:
    return LinearCode.random(n, cols, gen).generator


def _run_density_vs_rate(config: ExperimentConfig) -> list:
    p = _Params(config)
    n = p.get_int("n", _REQUIRED)
    rates = p.get_float_list("rates", _REQUIRED)
    trials = p.get_int("trials", 100)
    passes = p.get_int("passes", 5)
    seeds = p.get_int("seeds", 1)
    p.finish()
    if seeds < 1:
        raise ValidationError(f"config field 'seeds': must be >= 1, got {seeds}")
    rows = []
    for ri, rate in enumerate(rates):
        t0 = time.perf_counter()
        cols = round(n * rate)
        if not 0 < cols <= n:
            raise ValidationError(f"config field 'rates': rate {rate} gives "
                                  f"{cols} columns at n={n}")
        densities = []
        for s in range(seeds):
            A = _random_full_rank(n, cols, _stream(config.seed, ri, s, 0))
            result = sparsify(A, trials, passes, _stream_seed(config.seed, ri, s, 1))
            densities.append(result.density)
        rows.append({"rate": cols / n, "cols": cols, "trials": trials,
                     "passes": passes, "seeds": seeds,
                     "density": float(np.mean(densities)),
                     "dr_bound": distortion_rate(cols / n),
                     "gauss_expect": _gauss_expect(n, cols),
                     "seed": config.seed,
                     "wall_time": time.perf_counter() - t0})
    return rows


def _run_density_vs_repetitions(config: ExperimentConfig) -> list:
    p = _Params(config)
    n = p.get_int("n", _REQUIRED)
    rates = p.get_float_list("rates", _REQUIRED)
    trials_list = p.get_int_list("trials_list", _REQUIRED)
    passes = p.get_int("passes", 1)
    seeds = p.get_int("seeds", 1)
    p.finish()
    if any(t < 1 for t in trials_list):
        raise ValidationError("config field 'trials_list': trials must be >= 1")
    rows = []
    for ri, rate in enumerate(rates):
        cols = round(n * rate)
        if not 0 < cols <= n:
            raise ValidationError(f"config field 'rates': rate {rate} gives "
                                  f"{cols} columns at n={n}")
        mats = [_random_full_rank(n, cols, _stream(config.seed, ri, s, 0))
                for s in range(seeds)]
        run_seeds = [_stream_seed(config.seed, ri, s, 1) for s in range(seeds)]
        for trials in trials_list:
            t0 = time.perf_counter()
            # same matrix and same sparsifier seed across the sweep, so a
            # larger trial budget explores a superset of row orders
            densities = [sparsify(mats[s], trials, passes, run_seeds[s]).density
                         for s in range(seeds)]
            rows.append({"rate": cols / n, "trials": trials, "passes": passes,
                         "seeds": seeds, "density": float(np.mean(densities)),
                         "dr_bound": distortion_rate(cols / n),
                         "seed": config.seed,
                         "wall_time": time.perf_counter() - t0})
    return rows


def load_design_config(path, seed: Optional[int] = None):
    """Build a JointCodeDesign from its own flat key = value file."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValidationError(f"design config line {lineno}: expected "
                                  f"key = value, got {stripped!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        raw[key] = value
    known = {"network", "n", "m", "rates", "lambda", "trials", "passes", "seed"}
    unknown = set(raw) - known
    if unknown:
        raise ValidationError(
            f"unknown design config fields: {', '.join(sorted(unknown))}")
    for need in ("network", "n", "m", "rates"):
        if need not in raw:
            raise ValidationError(f"design config field {need!r}: required")
    net = butterfly() if raw["network"] == "butterfly" else load_network(raw["network"])
    lam_raw = raw.get("lambda", "uniform")
    policy = lam_raw if lam_raw in ("uniform", "auto") else _parse_float("lambda", lam_raw)
    if seed is None:
        if "seed" not in raw:
            raise ValidationError("design config field 'seed': required")
        seed = _parse_int("seed", raw["seed"])
    return design_joint_code(
        net, m=_parse_int("m", raw["m"]), lambda_policy=policy,
        n=_parse_int("n", raw["n"]), rates=_parse_rates_map("rates", raw["rates"]),
        sparsify_budget=(_parse_int("trials", raw.get("trials", 32)),
                         _parse_int("passes", raw.get("passes", 2))),
        rng=seed)


def _ber_checks(config: ExperimentConfig, p: _Params) -> list:
    """Resolve the decoding matrices: (label, BitMatrix) pairs."""
    matrix = p.get_str("matrix")
    structured = p.get_int("structured")
    design = p.get_str("design")
    chosen = [name for name, v in (("matrix", matrix), ("structured", structured),
                                   ("design", design)) if v is not None]
    if len(chosen) != 1:
        raise ValidationError("exactly one of config fields 'matrix', "
                              "'structured', 'design' is required")
    if matrix is not None:
        return [("matrix", load_matrix(matrix))]
    if structured is not None:
        return [("structured", structured_ldpc(structured,
                                               _stream(config.seed, 100)))]
    built = load_design_config(design)
    return [(f"terminal_{t}", td.parity_check)
            for t, td in built.terminals.items()]


def _run_ber_sweep(config: ExperimentConfig) -> list:
    p = _Params(config)
    p_list = p.get_float_list("p_list", _REQUIRED)
    bits = p.get_float("bits", _REQUIRED)
    max_iter = p.get_int("max_iter", 50)
    checks = _ber_checks(config, p)
    p.finish()
    if bits < 0:
        raise ValidationError(f"config field 'bits': must be >= 0, got {bits}")
    if bits == 0:
        return []
    rows = []
    for pi, crossover in enumerate(p_list):
        t0 = time.perf_counter()
        errors = 0
        total_bits = 0
        converged = 0
        blocks_total = 0
        for ci, (_, Hbar) in enumerate(checks):
            blocks = -(-int(bits) // Hbar.rows)
            res = wyner_pipeline(Hbar, crossover,
                                 _stream_seed(config.seed, pi, ci),
                                 blocks, max_iter=max_iter)
            errors += res.bit_errors
            total_bits += res.bits
            converged += res.converged_blocks
            blocks_total += res.blocks
        rows.append({"p": crossover, "bits": total_bits, "bit_errors": errors,
                     "ber": errors / total_bits,
                     "converged_fraction": converged / blocks_total,
                     "seed": config.seed,
                     "wall_time": time.perf_counter() - t0})
    return rows


def _run_rd_gap(config: ExperimentConfig) -> list:
    p = _Params(config)
    n = p.get_int("n", _REQUIRED)
    rate = p.get_float("rate", _REQUIRED)
    draws_list = p.get_int_list("draws_list", None) or [1, 2, 4, 8, 16]
    instances = p.get_int("instances", 50)
    p.finish()
    dim = round(n * rate)
    if not 0 < dim < n:
        raise ValidationError(f"config field 'rate': rate {rate} gives dimension "
                              f"{dim} at n={n}")
    rows = []
    for di, draws in enumerate(draws_list):
        t0 = time.perf_counter()
        total = 0.0
        for inst in range(instances):
            gen = _stream(config.seed, di, inst)
            code = LinearCode.random(n, dim, gen)
            word = gen.integers(0, 2, size=n).astype(np.uint8)
            total += rd_encode_multi(code, word, draws, gen).distortion / n
        rows.append({"draws": draws, "rate": dim / n, "instances": instances,
                     "mean_distortion": total / instances,
                     "dr_bound": distortion_rate(dim / n),
                     "seed": config.seed,
                     "wall_time": time.perf_counter() - t0})
    return rows


def _symbol_fraction(mat: BitMatrix, m: int) -> float:
    """Fraction of nonzero m x m cells when rows and columns group by m."""
    dense = mat.to_dense()
    rows, cols = dense.shape
    if rows % m or cols % m:
        raise ValidationError(f"matrix {rows}x{cols} does not tile into "
                              f"{m}x{m} cells")
    cells = dense.reshape(rows // m, m, cols // m, m).any(axis=(1, 3))
    return float(cells.mean())


def _run_netcode_sparsify(config: ExperimentConfig) -> list:
    p = _Params(config)
    network = p.get_str("network")
    nodes = p.get_int("nodes", 70)
    layers = p.get_int("layers", 4)
    edge_density = p.get_float("edge_density", 0.5)
    terminals = p.get_int("terminals", 2)
    m = p.get_int("m", 4)
    w = p.get_int("w")
    trials = p.get_int("trials", 100)
    passes = p.get_int("passes", 3)
    p.finish()
    if network == "butterfly":
        net = butterfly()
    elif network is not None:
        net = load_network(network)
    else:
        net = random_dag(nodes, layers, edge_density, terminals,
                         _stream(config.seed, 0))
    flows = {t: maxflow(net, t) for t in net.terminals}
    if w is None:
        w = min(flows.values())
    code = build_broadcast_code(net, w, m, _stream(config.seed, 1))
    rows = []
    for ti, t in enumerate(net.terminals):
        t0 = time.perf_counter()
        B = code.transfer[t]
        result = sparsify(B, trials, passes, _stream_seed(config.seed, 2, ti))
        rows.append({"terminal": t, "maxflow": flows[t],
                     "density_before": B.density,
                     "density_after": result.density,
                     "symbols_before_pct": 100.0 * _symbol_fraction(B, m),
                     "symbols_after_pct": 100.0 * _symbol_fraction(result.sparsified, m),
                     "seed": config.seed,
                     "wall_time": time.perf_counter() - t0})
    return rows


def _run_entry_probabilities(config: ExperimentConfig) -> list:
    p = _Params(config)
    n = p.get_int("n", _REQUIRED)
    lam = p.get_float("lam", _REQUIRED)
    l_list = p.get_int_list("l_list", _REQUIRED)
    resamples = p.get_int("resamples", 10_000)
    rows_per = p.get_int("rows", 1024)
    p.finish()
    samples = resamples * rows_per
    if samples < 1:
        raise ValidationError("config fields 'resamples' and 'rows' must be >= 1")
    out = []
    for li, l in enumerate(l_list):
        t0 = time.perf_counter()
        gen = _stream(config.seed, li)
        # the (i, j) entry of H @ B is a parity of l i.i.d. Bernoulli(lam/n)
        # H entries, so resampling H reduces to fresh binomial draws
        parities = gen.binomial(l, lam / n, size=samples) & 1
        empirical = float(np.mean(parities == 0))
        analytic = entry_zero_prob(lam, l, n)
        sigma = math.sqrt(analytic * (1.0 - analytic) / samples)
        out.append({"l": l, "lam": lam, "samples": samples,
                    "empirical_zero_prob": empirical,
                    "analytic_zero_prob": analytic,
                    "abs_error": abs(empirical - analytic), "sigma": sigma,
                    "seed": config.seed,
                    "wall_time": time.perf_counter() - t0})
    return out


_RUNNERS = {
    "density_vs_rate": _run_density_vs_rate,
    "density_vs_repetitions": _run_density_vs_repetitions,
    "ber_sweep": _run_ber_sweep,
    "rd_gap": _run_rd_gap,
    "netcode_sparsify": _run_netcode_sparsify,
    "entry_probabilities": _run_entry_probabilities,
}


def _format_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(kind: str, rows: list) -> str:
    columns = COLUMNS[kind] + UNIVERSAL_COLUMNS
    lines = [f"# kind={kind}", ",".join(columns)]
    for row in rows:
        lines.append(",".join(_format_value(row[c]) for c in columns))
    return "\n".join(lines) + "\n"


def write_csv(kind: str, rows: list, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(rows_to_csv(kind, rows))


def read_csv(path) -> tuple:
    """Read a harness CSV back as (kind, columns, rows of string dicts)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    kind = None
    body = []
    for ln in lines:
        if ln.startswith("#"):
            stripped = ln[1:].strip()
            if stripped.startswith("kind="):
                kind = stripped[len("kind="):]
            continue
        if ln.strip():
            body.append(ln)
    if not body:
        raise ValidationError(f"{path}: no header line")
    columns = body[0].split(",")
    rows = []
    for ln in body[1:]:
        parts = ln.split(",")
        if len(parts) != len(columns):
            raise ValidationError(f"{path}: row has {len(parts)} fields, "
                                  f"header has {len(columns)}")
        rows.append(dict(zip(columns, parts)))
    return kind, columns, rows


def _plot_series(kind: str, rows: list) -> tuple:
    """Per-kind series layout: (series list, xlabel, ylabel, logy)."""
    if kind in ("density_vs_rate", "density_vs_repetitions"):
        xkey = "rate" if kind == "density_vs_rate" else "trials"
        series = []
        if kind == "density_vs_rate":
            xs = [r["rate"] for r in rows]
            series.append(Series("sparsified", xs, [r["density"] for r in rows]))
            series.append(Series("distortion-rate bound", xs,
                                 [r["dr_bound"] for r in rows], dashed=True))
            series.append(Series("gauss baseline", xs,
                                 [r["gauss_expect"] for r in rows], dashed=True))
        else:
            for rate in sorted({r["rate"] for r in rows}):
                sub = [r for r in rows if r["rate"] == rate]
                xs = [r["trials"] for r in sub]
                series.append(Series(f"rate {rate:g}", xs,
                                     [r["density"] for r in sub]))
                series.append(Series(f"bound at rate {rate:g}", xs,
                                     [r["dr_bound"] for r in sub], dashed=True))
        return series, xkey, "density", False
    if kind == "ber_sweep":
        xs = [r["p"] for r in rows]
        return ([Series("measured", xs, [r["ber"] for r in rows]),
                 Series("uncoded", xs, xs, dashed=True)],
                "crossover p", "bit error rate", True)
    if kind == "rd_gap":
        xs = [r["draws"] for r in rows]
        return ([Series("mean distortion", xs, [r["mean_distortion"] for r in rows]),
                 Series("distortion-rate bound", xs,
                        [r["dr_bound"] for r in rows], dashed=True)],
                "draws", "normalized distortion", False)
    if kind == "entry_probabilities":
        xs = [r["l"] for r in rows]
        return ([Series("empirical", xs, [r["empirical_zero_prob"] for r in rows]),
                 Series("analytic", xs, [r["analytic_zero_prob"] for r in rows],
                        dashed=True)],
                "column weight l", "Pr(entry = 0)", False)
    xs = list(range(len(rows)))
    return ([Series("before", xs, [r["symbols_before_pct"] for r in rows]),
             Series("after", xs, [r["symbols_after_pct"] for r in rows])],
            "terminal index", "nonzero symbols (%)", False)


def run(config: ExperimentConfig, csv_path=None, svg_path=None) -> list:
    """Run the experiment; write CSV/SVG when paths are given or configured."""
    rows = _RUNNERS[config.kind](config)
    csv_path = csv_path or config.csv_path
    svg_path = svg_path or config.svg_path
    if csv_path:
        write_csv(config.kind, rows, csv_path)
    if svg_path:
        series, xlabel, ylabel, logy = _plot_series(config.kind, rows)
        save_plot(series, svg_path, xlabel=xlabel, ylabel=ylabel,
                  logy=logy, title=config.kind)
    return rows


@dataclass
class CompareReport:
    """Per-column max absolute differences between two runs of one kind."""

    kind: Optional[str]
    rows: int
    diffs: dict
    ignored: tuple = COMPARE_IGNORED

    def max_diff(self) -> float:
        return max(self.diffs.values(), default=0.0)

    def within(self, tol: float) -> bool:
        return all(d <= tol for d in self.diffs.values())

    def summary(self, tol: float) -> str:
        lines = [f"kind: {self.kind or 'unknown'}  rows: {self.rows}"]
        for col, d in self.diffs.items():
            marker = "DIFF" if d > tol else "ok"
            lines.append(f"  {col}: max |diff| = {d:g}  [{marker}]")
        for col in self.ignored:
            lines.append(f"  {col}: ignored")
        return "\n".join(lines)


def compare_runs(path_a, path_b, tol: float = 1e-9) -> CompareReport:
    """Column-wise comparison of two CSVs; schema must match exactly."""
    kind_a, cols_a, rows_a = read_csv(path_a)
    kind_b, cols_b, rows_b = read_csv(path_b)
    if kind_a != kind_b:
        raise ValidationError(f"kind mismatch: {kind_a!r} vs {kind_b!r}")
    if cols_a != cols_b:
        raise ValidationError(f"column mismatch: {cols_a} vs {cols_b}")
    if len(rows_a) != len(rows_b):
        raise ValidationError(f"row count mismatch: {len(rows_a)} vs {len(rows_b)}")
    diffs = {c: 0.0 for c in cols_a if c not in COMPARE_IGNORED}
    for ra, rb in zip(rows_a, rows_b):
        for c in diffs:
            va, vb = ra[c], rb[c]
            try:
                d = abs(float(va) - float(vb))
            except ValueError:
                d = 0.0 if va == vb else math.inf
            diffs[c] = max(diffs[c], d)
    return CompareReport(kind=kind_a, rows=len(rows_a), diffs=diffs)
