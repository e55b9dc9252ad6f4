import numpy as np
import pytest

from riscr.config import ScenarioConfig, dump_config, load_config, parse_settings


# [PAPER] simulation parameter table and SNR definition
def test_defaults_and_derived_powers():
    c = ScenarioConfig()
    assert (c.N_t, c.N_r, c.N, c.M, c.N_s, c.M_t, c.M_r) == (128, 8, 16, 4, 2, 8, 2)
    assert c.sigma2 == pytest.approx(10 ** (-12.1))
    assert c.p_t == pytest.approx(c.sigma2)  # SNR = 0 dB
    assert c.replace(gamma_db=10).i_th == pytest.approx(10 * c.sigma2)
    np.testing.assert_array_equal(c.replace(weights=(1, 2, 3, 4)).weight_matrix()[:, 1], [1, 2, 3, 4])


@pytest.mark.parametrize("changes", [
    dict(M_t=6), dict(N_s=3), dict(N_r=1, M_r=2, M_t=8), dict(trials=0),
    dict(schemes=("nope",)), dict(weights=(1.0,)),
])
# [TRIVIAL] dimension constraints
def test_invalid_configs_rejected(changes):
    with pytest.raises(ValueError):
        ScenarioConfig(**changes)


# [TRIVIAL] M_t = M*M_r
def test_sweep_value_keeps_rf_chain_count_consistent():
    c = ScenarioConfig().with_sweep_value("M", 3)
    assert c.M == 3 and c.M_t == 6
    assert ScenarioConfig().with_sweep_value("snr", 15).snr_db == 15.0
    with pytest.raises(ValueError):
        ScenarioConfig().with_sweep_value("bogus", 1)


# [DERIVED] parse-back check
def test_ini_round_trip(tmp_path):
    c = parse_settings({"N": "32", "snr_db": "5", "weights": "1, 2, 1, 1", "pu_x": "-50",
                        "max_outer_iterations": "7", "rcg_tolerance": "1e-5", "shadowing": "no"})
    assert c.pu_position == (-50.0, 0.0) and not c.shadowing
    path = tmp_path / "c.ini"
    path.write_text(dump_config(c))
    assert load_config(path) == c


# [TRIVIAL] input validation
def test_unknown_key_rejected():
    with pytest.raises(KeyError):
        parse_settings({"N_tt": "3"})
