"""Config parsing: format, defaults, validation."""

import numpy as np
import pytest

from mixing_sgd.errors import ConfigError
from mixing_sgd.harness.config import parse_config_text, parse_model
from mixing_sgd.mixing.models import Algebraic, Geometric, Iid, Tabulated
from mixing_sgd.mixing.streams import HoldTimeUniformSpec, IidUniformSpec

MINIMAL = """
base_seed=7

[stream]
kind=iid_uniform
d=2
seed=5

[run]
scheme=plain
lr=constant:0.05
n_iters=100

[run]
scheme=minibatch
B=4
lr=constant:0.05
n_iters=25
"""


def test_minimal_config_parses():
    cfg = parse_config_text(MINIMAL)
    assert cfg.base_seed == 7
    assert isinstance(cfg.stream_spec, IidUniformSpec)
    assert cfg.stream_spec.seed == 5
    assert len(cfg.runs) == 2
    assert cfg.runs[1].scheme_kind == "minibatch"
    assert cfg.runs[1].batch_size == 4
    assert cfg.problem.dim == 2
    assert np.array_equal(cfg.init_point, np.zeros(2))


def test_empty_config_gets_tuned_defaults():
    cfg = parse_config_text("base_seed=3\n")
    assert isinstance(cfg.stream_spec, HoldTimeUniformSpec)
    assert cfg.mix_rate == 2.0
    assert cfg.problem.dim == 10
    assert cfg.compare_n_trials == 100
    assert cfg.bias_n_mc == 10_000


def test_problem_section_with_diag_shorthand():
    text = MINIMAL + """
[problem]
d=2
A=diag:2.0,3.0
domain_center=0.0,0.0
domain_radius=4.0
init_point=1.0,1.0
"""
    cfg = parse_config_text(text)
    assert np.array_equal(cfg.problem.matrix, np.diag([2.0, 3.0]))
    assert cfg.problem.domain_radius == 4.0
    assert np.array_equal(cfg.init_point, [1.0, 1.0])


def test_full_matrix_and_row_major_order():
    text = MINIMAL + """
[problem]
d=2
A=1.0,0.25,0.25,2.0
"""
    cfg = parse_config_text(text)
    assert np.array_equal(cfg.problem.matrix, [[1.0, 0.25], [0.25, 2.0]])


def test_hold_stream_via_mix_rate():
    text = """
[stream]
kind=hold_time_uniform
d=3
mix_rate=1.5
seed=9
"""
    cfg = parse_config_text(text)
    assert isinstance(cfg.stream_spec, HoldTimeUniformSpec)
    assert cfg.stream_spec.alpha > 1.0
    assert cfg.mix_rate == 1.5


def test_parse_model_variants():
    assert parse_model("iid") == Iid()
    assert parse_model("geometric:1.5") == Geometric(1.5)
    assert parse_model("algebraic:0.5") == Algebraic(0.5)
    tab = parse_model("tabulated:zero:1.0,0.5")
    assert isinstance(tab, Tabulated) and tab.tail_rule == "zero"
    with pytest.raises(ConfigError):
        parse_model("powerlaw:2")
    with pytest.raises(ConfigError):
        parse_model("geometric:nope")


@pytest.mark.parametrize("mutation,match", [
    ("base_seed=7\nbase_seed=8\n", "duplicate"),
    ("just a line without equals\n", "key=value"),
    ("[run]\nscheme=momentum\n", "unknown scheme"),
    ("[run]\nscheme=plain\nlr=constant:-1\n", "positive"),
    ("[compare]\nn_trials=0\n", "n_trials"),
    ("[bias_sweep]\nn_mc=10\n", "n_mc"),
    ("[bias_sweep]\ntaus=\n", "non-empty"),
    ("[stream]\nkind=hold_time_uniform\nd=2\n", "alpha or mix_rate"),
    ("[stream]\nkind=warp\nd=2\nseed=1\n", "unknown stream kind"),
])
def test_config_errors(mutation, match):
    with pytest.raises(ConfigError, match=match):
        parse_config_text(mutation)


def test_dimension_mismatch_rejected():
    text = """
[stream]
kind=iid_uniform
d=3
seed=1

[problem]
d=2
"""
    with pytest.raises(ConfigError, match="dimension"):
        parse_config_text(text)


def test_finite_chain_stream_section():
    text = """
[stream]
kind=finite_chain
n_states=2
transition=0.75,0.25,0.25,0.75
emission=0.0,1.0
seed=4
"""
    cfg = parse_config_text(text)
    assert cfg.stream_spec.n_states == 2
    # problem moments come from the chain's stationary law
    assert cfg.problem.stationary_mean[0] == pytest.approx(0.5, abs=1e-10)


def test_comments_and_blank_lines_ignored():
    text = "# header\n\nbase_seed=12\n\n# more\n[stream]\nkind=iid_uniform\nd=1\nseed=2\n"
    assert parse_config_text(text).base_seed == 12
