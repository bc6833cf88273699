import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cograph.config import ALIASES, PRESETS, parse_config, preset_config, presets
from cograph.errors import ConfigError
from cograph.scenarios import build


def problems(text):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    return exc.value.problems


def test_minimal_config_defaults():
    cfg = parse_config("graph.n = 2\n")
    assert cfg.graph.n == 2 and cfg.graph.placement == "grid"
    assert cfg.integrator.scheme == "rk4-with-exact-eta"
    assert cfg.integrator.dt == 1e-3 and cfg.integrator.t_end == 1.0
    assert cfg.flux.kind == "upwind" and cfg.velocity.kind == "alpha"
    assert cfg.eta0.value == 1.0 and cfg.omega.value == 1.0


def test_dt_zero_reported_at_its_line():
    probs = problems("graph.n = 2\n# comment\nintegrator.dt = 0\n")
    assert (3, "integrator.dt must be > 0") in probs


def test_negative_eta0_in_monotone_scenario():
    text = PRESETS["consensus-2"].replace("eta0.value = 1", "eta0.value = -1")
    probs = problems(text)
    assert any("positivity invariant" in msg and "eta0" in msg for _, msg in probs)
    line = text.splitlines().index("eta0.value = -1") + 1
    assert any(ln == line for ln, _ in probs)


def test_all_problems_reported():
    text = "graph.n = x\nfoo.bar = 1\nintegrator.nope = 2\nflux.kind = central\nintegrator.dt = 1\nintegrator.dt = 2\n"
    lines = sorted(ln for ln, _ in problems(text))
    assert lines == [0, 1, 2, 3, 4, 6]


def test_seed_required_for_random():
    probs = problems("graph.n = 3\ngraph.placement = uniform-random\ninit_r.kind = uniform-random\n")
    msgs = " ".join(m for _, m in probs)
    assert "graph.seed" in msgs and "init_r.seed" in msgs


def test_missing_equals_and_section():
    probs = problems("graph.n 2\nn = 3\n")
    assert [ln for ln, _ in probs][:2] == [1, 2]


def test_every_preset_parses_and_builds():
    for name in presets():
        cfg = preset_config(name)
        sc = build(cfg)
        assert sc.mu.n == cfg.graph.n
        assert np.isclose(sc.mu.weights.sum(), 1.0)


def test_aliases():
    for alias, target in ALIASES.items():
        assert preset_config(alias) == preset_config(target)
    with pytest.raises(KeyError):
        preset_config("nope")


def test_consensus_2_matches_canonical_instance():
    cfg = preset_config("consensus-2")
    sc = build(cfg)
    assert cfg.graph.n == 2 and cfg.flux.kind == "upwind" and cfg.velocity.alpha == "sigmoid"
    np.testing.assert_array_equal(sc.init.r, [2.0, 0.0])
    assert sc.init.eta[0, 1] == 1 and sc.system.omega.c == 1
    assert cfg.integrator.dt == 1e-3 and cfg.integrator.t_end == 10


def test_explicit_weights_are_normalized():
    cfg = parse_config("graph.n = 3\ngraph.weights = explicit\ngraph.weight_values = 1, 1, 2\n")
    np.testing.assert_allclose(build(cfg).mu.weights, [0.25, 0.25, 0.5])


def test_grid_placement_is_distinct():
    cfg = parse_config("graph.n = 10\ngraph.dimension = 2\n")
    pts = build(cfg).mu.points
    assert len({tuple(p) for p in pts}) == 10


@given(st.integers(1, 50), st.floats(1e-6, 1.0), st.floats(1e-3, 100.0))
def test_roundtrip_numeric_fields(n, dt, t_end):
    cfg = parse_config(f"graph.n = {n}\nintegrator.dt = {dt!r}\nintegrator.t_end = {t_end!r}\n")
    assert (cfg.graph.n, cfg.integrator.dt, cfg.integrator.t_end) == (n, dt, t_end)
