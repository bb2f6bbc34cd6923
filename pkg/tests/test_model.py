import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frontlab.errors import ConfigError, DomainError, HypothesisError
from frontlab.model import (cubic_model, cubic_potential, eval_potential, load_model,
                            model_from_dict, require_valid, validate_hypotheses, ModelSpec,
                            ReactionSpec, DampingSpec)

alphas = st.floats(0.05, 0.95)


@settings(max_examples=40, deadline=None)
@given(alphas, st.floats(0.2, 5.0), st.floats(0.0, 1.0))
def test_potential_closed_form_matches_quadrature(alpha, kappa, u):
    m = cubic_model(alpha, kappa=kappa)
    assert eval_potential(m, u) == pytest.approx(cubic_potential(alpha, kappa, u), abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(alphas)
def test_potential_difference_sign(alpha):
    # F(1) - F(0) = kappa (1 - 2 alpha) / 12 ... sign follows alpha - 1/2
    m = cubic_model(alpha)
    diff = eval_potential(m, 1.0)
    assert diff == pytest.approx((2 * alpha - 1) / 12, abs=1e-12)


def test_potential_outside_unit_interval():
    with pytest.raises(DomainError):
        eval_potential(cubic_model(0.3), 1.2)


@pytest.mark.parametrize("alpha", [0.1, 0.3, 0.5, 0.9])
@pytest.mark.parametrize("kind,tau", [("constant-one", 0.0), ("constant-one", 1.0),
                                      ("cattaneo-maxwell", 1.0)])
def test_canonical_models_valid(alpha, kind, tau):
    rep = validate_hypotheses(cubic_model(alpha, kind, tau))
    assert rep.passed, [c for c in rep.clauses if not c.passed]


def test_cattaneo_bound():
    # tau_m = 1/max|f'| ; max |f'| for alpha=0.3 is at u=1: 0.7
    m = cubic_model(0.3, "cattaneo-maxwell", 1.0)
    assert m.tau_m == pytest.approx(1 / 0.7, rel=1e-6)
    rep = validate_hypotheses(cubic_model(0.3, "cattaneo-maxwell", 5.0))
    assert not rep.passed
    with pytest.raises(HypothesisError):
        require_valid(cubic_model(0.3, "cattaneo-maxwell", 5.0))


def test_cattaneo_damping_formula():
    m = cubic_model(0.3, "cattaneo-maxwell", 0.7)
    u = np.linspace(0, 1, 11)
    assert np.allclose(m.g(u), 1 - 0.7 * m.df(u))
    assert np.allclose(m.dg(u), -0.7 * m.reaction.d2f(u))


def test_non_bistable_reaction_reported():
    # sign pattern reversed: positive below the interior root, negative above
    nodes = (0.0, 0.25, 0.5, 0.75, 1.0)
    spec = ModelSpec(ReactionSpec("custom-sampled", nodes=nodes, f_nodes=(0.0, 0.1, 0.0, -0.1, 0.0),
                                  df_nodes=(0.5, 0.0, -0.5, 0.0, 0.5)), DampingSpec(), 0.0)
    rep = validate_hypotheses(spec)
    assert not rep.passed
    assert not rep.clause("H1.negative_below_alpha").passed


def test_custom_sampled_reaction_reproduces_cubic():
    alpha = 0.3
    ref = cubic_model(alpha)
    nodes = tuple(np.linspace(0, 1, 41))
    spec = ModelSpec(ReactionSpec("custom-sampled", nodes=nodes,
                                  f_nodes=tuple(ref.f(np.array(nodes))),
                                  df_nodes=tuple(ref.df(np.array(nodes)))), DampingSpec(), 0.0)
    assert spec.alpha == pytest.approx(alpha, abs=1e-8)
    assert validate_hypotheses(spec).passed


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="colour"):
        model_from_dict({"reaction": {"kind": "cubic", "alpha": 0.3, "colour": 1},
                         "damping": {"kind": "constant-one"}})
    with pytest.raises(ConfigError, match="speed"):
        model_from_dict({"reaction": {"kind": "cubic", "alpha": 0.3},
                         "damping": {"kind": "constant-one"}, "speed": 2})


def test_load_model_roundtrip(tmp_path):
    m = cubic_model(0.4, "cattaneo-maxwell", 0.5, kappa=2.0)
    p = tmp_path / "m.json"
    p.write_text(json.dumps({"model": m.to_dict()}))
    back = load_model(p)
    assert back.to_dict() == m.to_dict()


def test_malformed_json_reports_line(tmp_path):
    p = tmp_path / "m.json"
    p.write_text('{"reaction":\n  {"kind": "cubic",,}}')
    with pytest.raises(ConfigError, match="line 2"):
        load_model(p)


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2])
def test_alpha_out_of_range(alpha):
    with pytest.raises((DomainError, ValueError)):
        cubic_model(alpha)
