"""Scenario configs: a flat ``section.key = value`` format and the built-in presets.

Lines look like ``integrator.dt = 1e-3``; ``#`` starts a comment and arrays are
comma separated.  Every problem found is reported with its line number, not
just the first one.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

from .errors import ConfigError

SCHEMES = ("rk4-with-exact-eta", "rk4-coupled", "euler")
CSV_COLUMNS = ("t", "mass", "r_min", "r_max", "diameter", "eta_min", "eta_max",
               "sup_bound", "inf_bound")
PAIR_COLUMNS = ("l2mu_d2", "dissipation_lhs", "dissipation_rhs")


def _opt(kind, default=None, choices=None):
    return field(default=default, metadata={"type": kind, "choices": choices})


@dataclass(frozen=True)
class GraphConfig:
    n: int = _opt(int)
    dimension: int = _opt(int, 1)
    placement: str = _opt(str, "grid", ("grid", "uniform-random"))
    seed: int = _opt(int)
    weights: str = _opt(str, "uniform", ("uniform", "explicit"))
    weight_values: tuple = _opt("floats")


@dataclass(frozen=True)
class Eta0Config:
    kind: str = _opt(str, "constant", ("constant", "gaussian"))
    value: float = _opt(float, 1.0)
    length: float = _opt(float, 1.0)


@dataclass(frozen=True)
class OmegaConfig:
    kind: str = _opt(str, "constant", ("constant", "kernel"))
    value: float = _opt(float, 1.0)
    kernel: str = _opt(str, "ones", ("ones", "gaussian"))
    length: float = _opt(float, 1.0)
    star: float = _opt(float)


@dataclass(frozen=True)
class VelocityConfig:
    kind: str = _opt(str, "alpha", ("alpha", "kernel", "static-kernel"))
    alpha: str = _opt(str, "sigmoid", ("sigmoid", "tanh-scaled", "identity", "identity-on-box"))
    slope: float = _opt(float, 1.0)
    center: float = _opt(float, 0.0)
    scale: float = _opt(float, 1.0)
    amplitude: float = _opt(float, 1.0)
    kernel: str = _opt(str, "gaussian", ("gaussian", "quadratic"))
    length: float = _opt(float, 1.0)


@dataclass(frozen=True)
class FluxConfig:
    kind: str = _opt(str, "upwind", ("upwind", "product-mean", "product-max"))


@dataclass(frozen=True)
class InitConfig:
    kind: str = _opt(str, "constant", ("constant", "uniform-random", "indicator", "explicit"))
    value: float = _opt(float, 1.0)
    seed: int = _opt(int)
    lo: float = _opt(float, 0.0)
    hi: float = _opt(float, 1.0)
    subset: tuple = _opt("ints")
    values: tuple = _opt("floats")


@dataclass(frozen=True)
class IntegratorConfig:
    scheme: str = _opt(str, "rk4-with-exact-eta", SCHEMES)
    dt: float = _opt(float, 1e-3)
    t_end: float = _opt(float, 1.0)
    record_stride: int = _opt(int, 1)


@dataclass(frozen=True)
class OutputsConfig:
    path: str = _opt(str, "out")
    diagnostics: tuple = _opt("strs", ("all",))


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = _opt(str, "trajectory",
                     ("trajectory", "pair", "monokinetic", "stability", "flow", "picard"))
    seed: int = _opt(int)
    perturbation: float = _opt(float, 1e-3)
    atoms: int = _opt(int, 3)
    spread: float = _opt(float, 0.1)
    vertex: int = _opt(int, 0)
    horizon: float = _opt(float, 0.1)
    tol: float = _opt(float, 1e-12)
    max_iters: int = _opt(int, 50)
    target_diameter: float = _opt(float)


SECTIONS = {
    "graph": GraphConfig,
    "eta0": Eta0Config,
    "omega": OmegaConfig,
    "velocity": VelocityConfig,
    "flux": FluxConfig,
    "init_r": InitConfig,
    "integrator": IntegratorConfig,
    "outputs": OutputsConfig,
    "experiment": ExperimentConfig,
}


@dataclass(frozen=True)
class ScenarioConfig:
    graph: GraphConfig
    eta0: Eta0Config = Eta0Config()
    omega: OmegaConfig = OmegaConfig()
    velocity: VelocityConfig = VelocityConfig()
    flux: FluxConfig = FluxConfig()
    init_r: InitConfig = InitConfig()
    integrator: IntegratorConfig = IntegratorConfig()
    outputs: OutputsConfig = OutputsConfig()
    experiment: ExperimentConfig = ExperimentConfig()
    lines: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def monotone(self):
        """Upwind flux with an alpha velocity: the long-time bounds apply."""
        return self.velocity.kind == "alpha" and self.flux.kind == "upwind"

    def with_outputs(self, path):
        return replace(self, outputs=replace(self.outputs, path=path))


def _convert(kind, raw):
    if kind is int:
        return int(raw)
    if kind is float:
        val = float(raw)
        if val != val or val in (float("inf"), float("-inf")):
            raise ValueError("not a finite number")
        return val
    if kind is str:
        return raw
    items = [x.strip() for x in raw.split(",") if x.strip()]
    if kind == "floats":
        return tuple(_convert(float, x) for x in items)
    if kind == "ints":
        return tuple(int(x) for x in items)
    return tuple(items)


_TYPE_NAMES = {int: "an integer", float: "a number", str: "a string",
               "floats": "a list of numbers", "ints": "a list of integers", "strs": "a list of names"}


def parse_config(text):
    """Parse and validate a config; raises :class:`ConfigError` listing every problem."""
    problems = []
    values = {name: {} for name in SECTIONS}
    lines = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append((ln, f"expected 'section.key = value', got {line!r}"))
            continue
        key, val = (s.strip() for s in line.split("=", 1))
        if "." not in key:
            problems.append((ln, f"key {key!r} needs a section prefix"))
            continue
        section, name = key.split(".", 1)
        if section not in SECTIONS:
            problems.append((ln, f"unknown section {section!r}"))
            continue
        spec = {f.name: f for f in fields(SECTIONS[section])}
        if name not in spec:
            problems.append((ln, f"unknown key {key!r}"))
            continue
        if key in lines:
            problems.append((ln, f"duplicate key {key!r} (first set on line {lines[key]})"))
            continue
        meta = spec[name].metadata
        try:
            conv = _convert(meta["type"], val)
        except ValueError:
            problems.append((ln, f"{key} must be {_TYPE_NAMES[meta['type']]}, got {val!r}"))
            continue
        choices = meta["choices"]
        if choices and conv not in choices:
            problems.append((ln, f"{key} must be one of {', '.join(choices)}; got {conv!r}"))
            continue
        values[section][name] = conv
        lines[key] = ln

    if "graph.n" not in lines:
        problems.append((0, "graph.n is required"))
    if problems:
        raise ConfigError(problems)
    cfg = ScenarioConfig(**{s: SECTIONS[s](**values[s]) for s in SECTIONS}, lines=lines)
    problems = validate(cfg)
    if problems:
        raise ConfigError(problems)
    return cfg


def validate(cfg):
    """Cross-field invariants; returns a list of ``(line, message)``."""
    out = []
    at = lambda key: cfg.lines.get(key, 0)

    def need(cond, key, msg):
        if not cond:
            out.append((at(key), msg))

    g, e, o, v = cfg.graph, cfg.eta0, cfg.omega, cfg.velocity
    i, integ, x = cfg.init_r, cfg.integrator, cfg.experiment
    need(g.n >= 1, "graph.n", "graph.n must be >= 1")
    need(g.dimension >= 1, "graph.dimension", "graph.dimension must be >= 1")
    if g.placement == "uniform-random":
        need(g.seed is not None, "graph.placement", "graph.seed is required for uniform-random placement")
    if g.weights == "explicit":
        w = g.weight_values
        need(w is not None and len(w) == g.n, "graph.weights",
             "graph.weight_values must list one weight per vertex")
        need(w is None or all(val > 0 for val in w), "graph.weight_values", "graph.weight_values must be > 0")
    need(integ.dt > 0, "integrator.dt", "integrator.dt must be > 0")
    need(integ.t_end > 0, "integrator.t_end", "integrator.t_end must be > 0")
    need(integ.record_stride >= 1, "integrator.record_stride", "integrator.record_stride must be >= 1")
    need(e.length > 0, "eta0.length", "eta0.length must be > 0")
    need(o.length > 0, "omega.length", "omega.length must be > 0")
    need(v.length > 0, "velocity.length", "velocity.length must be > 0")
    for key in ("slope", "scale", "amplitude"):
        need(getattr(v, key) > 0, f"velocity.{key}", f"velocity.{key} must be > 0")
    if i.kind == "uniform-random":
        need(i.seed is not None, "init_r.kind", "init_r.seed is required for uniform-random init")
        need(i.lo <= i.hi, "init_r.lo", "init_r.lo must be <= init_r.hi")
    if i.kind == "explicit":
        need(i.values is not None and len(i.values) == g.n, "init_r.values",
             "init_r.values must list one value per vertex")
    if i.kind == "indicator":
        need(i.subset is not None and all(0 <= k < g.n for k in i.subset), "init_r.subset",
             "init_r.subset must list vertex indices below graph.n")
    bad = [c for c in cfg.outputs.diagnostics if c != "all" and c not in CSV_COLUMNS + PAIR_COLUMNS]
    need(not bad, "outputs.diagnostics", f"unknown diagnostics {bad}")

    if cfg.monotone:
        if e.kind == "constant":
            need(e.value > 0, "eta0.value",
                 "positivity invariant violated: eta0.value must be > 0 for an upwind alpha-velocity scenario")
        if o.kind == "constant":
            need(o.value >= 0, "omega.value",
                 "positivity invariant violated: omega.value must be >= 0 for an upwind alpha-velocity scenario")
        r_min = {"constant": i.value, "uniform-random": i.lo,
                 "explicit": min(i.values) if i.values else 0.0, "indicator": 0.0}[i.kind]
        need(r_min >= 0, f"init_r.{'lo' if i.kind == 'uniform-random' else 'kind'}",
             "positivity invariant violated: initial density must be >= 0 for an upwind alpha-velocity scenario")

    if x.kind in ("pair", "stability"):
        need(x.seed is not None, "experiment.kind", f"experiment.seed is required for {x.kind} runs")
    if x.kind == "pair":
        need(v.kind == "static-kernel", "velocity.kind",
             "pair runs need a density-independent velocity (velocity.kind = static-kernel)")
        need(o.kind == "constant", "omega.kind", "pair runs need a density-independent omega (constant)")
        need(cfg.flux.kind == "upwind", "flux.kind", "pair runs need the upwind flux")
    if x.kind == "stability":
        need(x.atoms >= 1, "experiment.atoms", "experiment.atoms must be >= 1")
        need(0 <= x.vertex < g.n, "experiment.vertex", "experiment.vertex must be a vertex index")
    if x.kind == "picard":
        need(x.horizon > 0, "experiment.horizon", "experiment.horizon must be > 0")
        need(x.max_iters >= 1, "experiment.max_iters", "experiment.max_iters must be >= 1")
    if x.target_diameter is not None:
        need(x.target_diameter > 0, "experiment.target_diameter", "experiment.target_diameter must be > 0")
    return out


_TWO_VERTEX = """\
graph.n = 2
eta0.kind = constant
eta0.value = 1
omega.kind = constant
omega.value = 1
velocity.kind = alpha
velocity.alpha = sigmoid
velocity.slope = 4
velocity.center = 1
flux.kind = upwind
init_r.kind = explicit
init_r.values = 2, 0
integrator.dt = 1e-3
"""

PRESETS = {
    "consensus-2": _TWO_VERTEX + """\
integrator.t_end = 10
integrator.record_stride = 10
experiment.target_diameter = 1e-3
""",
    "consensus-8": """\
graph.n = 8
graph.dimension = 2
graph.placement = uniform-random
graph.seed = 8
eta0.kind = gaussian
eta0.length = 0.5
omega.kind = kernel
omega.kernel = ones
velocity.kind = alpha
velocity.alpha = sigmoid
velocity.slope = 4
velocity.center = 1
init_r.kind = uniform-random
init_r.seed = 8
init_r.lo = 0
init_r.hi = 2
integrator.dt = 1e-2
integrator.t_end = 20
integrator.record_stride = 10
experiment.target_diameter = 1e-2
""",
    "consensus-64": """\
graph.n = 64
graph.dimension = 2
graph.placement = grid
eta0.value = 1
omega.value = 1
velocity.kind = alpha
velocity.alpha = sigmoid
velocity.slope = 4
velocity.center = 1
init_r.kind = uniform-random
init_r.seed = 64
init_r.lo = 0
init_r.hi = 2
integrator.dt = 1e-2
integrator.t_end = 20
integrator.record_stride = 20
experiment.target_diameter = 1e-2
""",
    "envelope": """\
graph.n = 16
graph.placement = uniform-random
graph.seed = 16
eta0.kind = gaussian
eta0.length = 0.4
omega.kind = kernel
omega.kernel = gaussian
omega.length = 1
velocity.kind = alpha
velocity.alpha = tanh-scaled
velocity.center = 1.5
velocity.scale = 2
init_r.kind = uniform-random
init_r.seed = 16
init_r.lo = 0
init_r.hi = 3
integrator.dt = 5e-3
integrator.t_end = 10
integrator.record_stride = 10
""",
    "dissipation": """\
graph.n = 4
graph.placement = uniform-random
graph.seed = 4
eta0.kind = gaussian
eta0.length = 0.7
omega.value = 1
velocity.kind = static-kernel
velocity.kernel = gaussian
velocity.length = 0.5
init_r.kind = uniform-random
init_r.seed = 4
init_r.lo = 0.5
init_r.hi = 2
integrator.dt = 1e-3
integrator.t_end = 2
experiment.kind = pair
experiment.seed = 44
experiment.perturbation = 0.2
""",
    "stability": _TWO_VERTEX + """\
integrator.t_end = 0.5
integrator.record_stride = 10
experiment.kind = stability
experiment.seed = 7
experiment.atoms = 3
experiment.spread = 0.2
experiment.perturbation = 1e-3
""",
    "picard": _TWO_VERTEX + """\
integrator.scheme = rk4-coupled
integrator.t_end = 0.1
experiment.kind = picard
experiment.horizon = 0.1
""",
    "eta-positivity": """\
graph.n = 4
eta0.value = 2
omega.value = 1
velocity.kind = alpha
velocity.alpha = sigmoid
velocity.slope = 4
velocity.center = 1
init_r.kind = uniform-random
init_r.seed = 3
init_r.lo = 0
init_r.hi = 2
integrator.dt = 1e-2
integrator.t_end = 10
""",
    "mass-check": """\
graph.n = 12
graph.dimension = 2
graph.placement = uniform-random
graph.seed = 12
graph.weights = explicit
graph.weight_values = 1, 2, 3, 4, 5, 6, 6, 5, 4, 3, 2, 1
eta0.kind = gaussian
eta0.length = 0.6
omega.kind = kernel
omega.kernel = gaussian
omega.length = 0.8
velocity.kind = kernel
velocity.kernel = gaussian
velocity.length = 0.4
flux.kind = product-mean
init_r.kind = uniform-random
init_r.seed = 12
init_r.lo = 0.5
init_r.hi = 1.5
integrator.dt = 5e-3
integrator.t_end = 5
integrator.record_stride = 5
""",
    "monokinetic": _TWO_VERTEX + """\
integrator.t_end = 10
integrator.record_stride = 10
experiment.kind = monokinetic
""",
    "flow": _TWO_VERTEX + """\
integrator.t_end = 1
experiment.kind = flow
""",
}


# the consensus presets are also reachable under their vertex-count names
ALIASES = {"consensus-n2": "consensus-2", "consensus-n8": "consensus-8", "consensus-n64": "consensus-64"}


def presets():
    """Name -> config text of every built-in scenario."""
    return dict(PRESETS)


def preset_config(name):
    name = ALIASES.get(name, name)
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}")
    return parse_config(PRESETS[name])
