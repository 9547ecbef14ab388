import numpy as np
import pytest

from quadcool import sweep
from quadcool.errors import ConfigError, SolverError
from quadcool.lindblad import CavityRateConvention
from quadcool.sweep import (CSV_HEADER, SweepRecord, parse_config, read_csv, records_to_csv,
                            run_sweep, write_csv)

FIG1 = """\
g = 0.1
kappa = 0.25
omega_drive = 0.1
gamma_m = 1e-6
n_th = 10
delta_min = -5
delta_max = 0
n_points = 51
solvers = rate,master
"""


def config(**changes):
    lines = dict(line.split(" = ") for line in FIG1.splitlines())
    lines.update({k: str(v) for k, v in changes.items()})
    return "\n".join(f"{k} = {v}" for k, v in lines.items()) + "\n"


def test_parse_fig1_config():
    cfg = parse_config(FIG1)
    assert cfg.params.g == 0.1 and cfg.params.omega_drive == 0.1
    assert cfg.solvers == {"rate", "master"}
    assert cfg.n_phonon_states == 30 and cfg.n_photon_states == 3
    assert cfg.l_max is None
    assert cfg.cavity_rate_convention is CavityRateConvention.FULL_KAPPA
    assert cfg.concurrency_limit == 1 and cfg.output_path == "-"
    assert np.allclose(np.diff(cfg.deltas), 0.1)


def test_comments_and_blank_lines():
    text = "# cooling run\n\n" + FIG1.replace("n_th = 10", "n_th = 10   # bath") + "l_max = 60\n"
    cfg = parse_config(text)
    assert cfg.params.n_th == 10 and cfg.l_max == 60


def test_unstable_coupling_is_rejected():
    with pytest.raises(ConfigError, match="stability"):
        parse_config("g = -0.3")
    # stable for one photon, not for two
    with pytest.raises(ConfigError, match="s = \\[2\\]"):
        parse_config(config(g=-0.2))
    assert parse_config(config(g=-0.2, n_photon_states=2)).params.g == -0.2


@pytest.mark.parametrize("text, line", [
    (FIG1 + "kapa = 0.3\n", 10),
    (FIG1 + "g = 0.2\n", 10),
    ("g 0.1\n", 1),
    (FIG1.replace("n_points = 51", "n_points = many"), 8),
    (FIG1.replace("rate,master", "rate,exact"), 9),
])
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}:")


@pytest.mark.parametrize("changes, needle", [
    (dict(n_points=1), "n_points"),
    (dict(delta_min=0), "delta_min"),
    (dict(kappa=0), "kappa"),
    (dict(concurrency_limit=0), "concurrency_limit"),
])
def test_validation_errors(changes, needle):
    with pytest.raises(ConfigError, match=needle):
        parse_config(config(**changes))


def test_missing_keys():
    with pytest.raises(ConfigError, match="n_th"):
        parse_config(FIG1.replace("n_th = 10\n", ""))


def small(**changes):
    base = dict(n_points=6, solvers="rate", delta_min=-3, delta_max=-0.5)
    base.update(changes)
    return parse_config(config(**base))


def test_run_sweep_records():
    recs = run_sweep(small())
    assert [r.delta for r in recs] == list(np.linspace(-3, -0.5, 6))
    for r in recs:
        assert r.converged_rate is True and r.converged_master is None
        assert r.n_ss_rate > 0 and r.n_ss_master is None and r.mandel_q_master is None


def test_two_point_sweep():
    recs = run_sweep(small(n_points=2))
    assert len(recs) == 2 and recs[0].delta < recs[1].delta


def test_concurrency_does_not_change_output():
    one = records_to_csv(run_sweep(small(concurrency_limit=1)))
    three = records_to_csv(run_sweep(small(concurrency_limit=3)))
    assert one == three


def test_failed_points_are_flagged_not_dropped(monkeypatch):
    def boom(*args, **kwargs):
        raise SolverError("no convergence")

    monkeypatch.setattr(sweep, "master_steady_state", boom)
    recs = run_sweep(small(n_points=3, solvers="rate,master"))
    assert len(recs) == 3
    for r in recs:
        assert r.converged_master is False and r.n_ss_master is None
        assert r.converged_rate is True and not r.failed


def test_sweep_locates_optimum_near_two_phonon_resonance():
    recs = run_sweep(small(n_points=51, delta_min=-5, delta_max=0))
    best = min(recs, key=lambda r: r.n_ss_rate)
    assert abs(best.delta + 2) <= 0.1 + 1e-9


def test_strong_coupling_shows_several_dips():
    recs = run_sweep(small(g=0.8, n_points=51, delta_min=-5, delta_max=0))
    n = np.array([r.n_ss_rate for r in recs])
    minima = np.flatnonzero((n[1:-1] < n[:-2]) & (n[1:-1] < n[2:]))
    assert minima.size >= 2


def test_csv_empty_and_single_record(tmp_path):
    path = tmp_path / "out.csv"
    write_csv([], path)
    assert path.read_bytes() == (",".join(CSV_HEADER) + "\n").encode()
    write_csv([SweepRecord(-2.0, n_ss_rate=0.25, mandel_q_rate=-0.1, fluct_f_rate=0.7,
                           converged_rate=True, converged_master=False)], path)
    lines = path.read_bytes().split(b"\n")
    assert len(lines) == 3 and lines[-1] == b""
    assert lines[1] == b"-2,0.25,,-0.1,,0.7,,true,false"


def test_csv_number_format():
    rec = SweepRecord(-1.0 / 3, n_ss_rate=2.0 / 3, converged_rate=True)
    row = records_to_csv([rec]).splitlines()[1]
    assert row.startswith("-0.333333333333,0.666666666667,")


def test_csv_rerun_is_byte_identical(tmp_path):
    cfg = small()
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(run_sweep(cfg), a)
    write_csv(run_sweep(cfg), b)
    assert a.read_bytes() == b.read_bytes()


def test_csv_round_trip(tmp_path):
    recs = run_sweep(small(n_points=3))
    path = tmp_path / "r.csv"
    write_csv(recs, path)
    back = read_csv(path)
    assert [r.converged_rate for r in back] == [True] * 3
    assert [r.n_ss_rate for r in back] == pytest.approx([r.n_ss_rate for r in recs], rel=1e-11)


def test_unwritable_path_is_reported(tmp_path):
    target = tmp_path / "missing" / "out.csv"
    with pytest.raises(OSError, match="missing"):
        write_csv([], target)
