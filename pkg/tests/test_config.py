import math

import pytest

from electric_ab.config import (
    SCHEMA,
    AnalysisOptions,
    RunConfig,
    config_key,
    default_config_path,
    load_config,
    parse_config,
)
from electric_ab.errors import ConfigError
from electric_ab.physics import CouplingParams
from electric_ab.sim import ExperimentConfig

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib


def default_doc():
    return tomllib.loads(default_config_path().read_text())


def with_value(section, key, value):
    doc = default_doc()
    if section:
        doc[section][key] = value
    else:
        doc[key] = value
    return doc


def test_default_file_matches_defaults():
    rc = load_config()
    assert rc.experiment == ExperimentConfig()
    assert rc.coupling == CouplingParams()
    assert rc.analysis == AnalysisOptions()
    assert rc == RunConfig()


def test_empty_document_gives_defaults():
    assert parse_config({}) == RunConfig()


def test_units_convert_to_si():
    doc = default_doc()
    doc["beam"]["region_length_cm"] = 2.0
    doc["apparatus"]["tube_radius_mm"] = 3.0
    doc["drive"]["amplitude_mv"] = 5.0
    doc["drive"]["fixed_frequency_ghz"] = 2.0
    doc["noise"]["rf_jitter_rms_ps"] = 0.5
    doc["sweep"]["omega_T_max_pi"] = 4.0
    doc["detector"]["fringe_period_um"] = 2.0
    e = parse_config(doc).experiment
    assert e.beam.region_length == pytest.approx(0.02, rel=1e-15)
    assert e.apparatus.tube_radius == pytest.approx(3e-3, rel=1e-15)
    assert e.amp == pytest.approx(5e-3, rel=1e-15)
    assert e.fixed_omega == pytest.approx(4 * math.pi * 1e9, rel=1e-15)
    assert e.rf_jitter_rms == pytest.approx(0.5e-12, rel=1e-15)
    assert e.omega_T_range[1] == pytest.approx(4 * math.pi, rel=1e-15)
    assert e.detector.fringe_period == pytest.approx(2e-6, rel=1e-15)


@pytest.mark.parametrize(
    "section, key, value",
    [
        ("", "seed", -1),
        ("beam", "kinetic_energy_ev", 0.0),
        ("beam", "energy_spread_fwhm_ev", -0.1),
        ("beam", "region_length_cm", 0.0),
        ("apparatus", "tube_radius_mm", 0.0),
        ("apparatus", "wall_conductivity_s_per_m", -5.0),
        ("apparatus", "wall_thickness_mm", 0.0),
        ("apparatus", "aperture_clearance_radii", -1.0),
        ("apparatus", "drift_length_cm", -1.0),
        ("apparatus", "stray_field_fraction", 2.0),
        ("apparatus", "stray_path_mm", 0.0),
        ("drive", "amplitude_mv", -1.0),
        ("drive", "fixed_frequency_ghz", 0.0),
        ("noise", "electrons_per_point", 0),
        ("noise", "fringe_visibility", 0.0),
        ("noise", "rf_jitter_rms_ps", -1.0),
        ("noise", "energy_sampling", "exact"),
        ("sweep", "mode", "energy"),
        ("sweep", "n_points", 1),
        ("sweep", "omega_T_min_pi", 0.0),
        ("sweep", "omega_T_max_pi", 0.1),
        ("detector", "fringe_period_um", 0.0),
        ("detector", "n_bins", 4),
        ("detector", "n_periods", 0.0),
        ("detector", "envelope_periods", -1.0),
        ("analysis", "basis", "cubic"),
        ("analysis", "limit", "99"),
    ],
)
def test_each_field_validated_with_its_file_key(section, key, value):
    with pytest.raises(ConfigError) as e:
        parse_config(with_value(section, key, value))
    name = f"{section}.{key}" if section else key
    msg = str(e.value)
    if key.startswith("omega_T_"):
        assert "sweep.omega_T_" in msg
    else:
        assert msg.startswith(name + ":"), msg
    assert "must satisfy" in msg


def test_n_points_message():
    with pytest.raises(ConfigError, match=r"^sweep\.n_points: must satisfy n_points ≥ 2 \(got 1\)$"):
        parse_config(with_value("sweep", "n_points", 1))


@pytest.mark.parametrize(
    "section, key, value",
    [("sweep", "n_points", 2.5), ("noise", "shot_noise", 1), ("beam", "kinetic_energy_ev", "100"),
     ("systematics", "div_a", "yes"), ("analysis", "basis", 3), ("beam", "kinetic_energy_ev", math.nan)],
)
def test_type_errors(section, key, value):
    with pytest.raises(ConfigError, match=f"{section}.{key}"):
        parse_config(with_value(section, key, value))


def test_unknown_section_and_key():
    with pytest.raises(ConfigError, match="bogus"):
        parse_config({"bogus": {}})
    with pytest.raises(ConfigError, match="beam.energy"):
        parse_config({"beam": {"energy": 1.0}})
    with pytest.raises(ConfigError, match="verbose"):
        parse_config({"verbose": True})


def test_truth_by_scale():
    rc = parse_config({"truth": {"g": 1.0, "lambda_tev": 1.0}})
    assert rc.coupling.kappa_over_hbar == pytest.approx(CouplingParams.from_scale(1.0, 1e12).kappa_over_hbar, rel=1e-15)
    with pytest.raises(ConfigError, match="truth"):
        parse_config({"truth": {"g": 1.0, "kappa_over_hbar_rad_per_v": 2.0}})
    with pytest.raises(ConfigError, match="lambda_tev"):
        parse_config({"truth": {"lambda_tev": 0.0}})


def test_analysis_limit_sigma():
    assert AnalysisOptions(limit="95").limit_sigma == 1.645
    assert AnalysisOptions().limit_sigma == 1.0


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError, match="config"):
        load_config(tmp_path / "missing.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("[beam\n")
    with pytest.raises(ConfigError, match="TOML"):
        load_config(bad)


def test_digest_ignores_formatting(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text("# a comment\n[sweep]\nn_points = 50\n")
    assert load_config(p).digest() == RunConfig().digest()
    assert RunConfig().with_seed(1).digest() != RunConfig().digest()
    with pytest.raises(ConfigError, match="seed"):
        RunConfig().with_seed(-3)


def test_every_schema_key_is_in_default_file():
    doc = default_doc()
    for sec, keys in SCHEMA.items():
        for key in keys:
            if sec == "truth" and key in ("g", "lambda_tev"):
                continue
            assert key in (doc if not sec else doc[sec]), f"{sec}.{key}"


def test_config_key_identity_for_unknown():
    assert config_key("n_points") == "sweep.n_points"
    assert config_key("whatever") == "whatever"
