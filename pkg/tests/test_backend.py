"""Step-kernel parity tests.

The compiled and pure-python kernels must be bit-identical observables:
same logs, stats, final weights and update counts for the same seeds on
both tasks. Parallel trial execution must reproduce the serial results
byte for byte.
"""

import numpy as np
import pytest

from plastevo import backend
from plastevo.foraging import SUMMER, WINTER, SeasonSchedule, run_foraging_trial
from plastevo.harness import ExperimentConfig, experiment_bench, run_rule_trials
from plastevo.preypredator import run_pp_trial
from plastevo.rules import NAMED_RULES


def _foraging(backend_name):
    with backend.using(backend_name):
        return run_foraging_trial(
            NAMED_RULES["foraging-best"],
            3,
            5,
            SeasonSchedule(200, (SUMMER, WINTER)),
            n_hidden=12,
            width=15,
            height=15,
            n_green=6,
            n_blue=6,
            collect_log=True,
        )


def _pp(backend_name):
    with backend.using(backend_name):
        return run_pp_trial(
            NAMED_RULES["pp-best"],
            4,
            6,
            SeasonSchedule(150, (SUMMER, WINTER)),
            n_hidden=10,
            width=14,
            height=14,
            n_green=3,
            n_blue=3,
            collect_log=True,
        )


def test_both_backends_are_registered():
    names = backend.available()
    assert "pure" in names and "compiled" in names
    for name in names:
        with backend.using(name):
            assert backend.current() == name
            assert hasattr(backend.active(), "foraging_steps")
            assert hasattr(backend.active(), "pp_steps")


def test_unknown_backend_is_rejected():
    with pytest.raises(ValueError):
        backend.set_backend("vectorized")


@pytest.mark.parametrize("runner", [_foraging, _pp], ids=["foraging", "prey-predator"])
def test_kernels_agree_bit_for_bit(runner):
    a = runner("pure")
    b = runner("compiled")
    assert a.log == b.log
    assert a.stats == b.stats
    assert a.updates == b.updates
    assert a.degenerate == b.degenerate
    assert np.array_equal(a.net.w_hidden, b.net.w_hidden)
    assert np.array_equal(a.net.w_out, b.net.w_out)


def test_parallel_trials_match_serial_byte_for_byte():
    base = dict(
        task="foraging",
        width=12,
        height=12,
        n_green=5,
        n_blue=5,
        n_hidden=8,
        season_length=100,
        seasons=2,
        seed=17,
        rule="foraging-best",
    )
    serial = run_rule_trials(ExperimentConfig(**base, jobs=1),
                             NAMED_RULES["foraging-best"], 4, collect_logs=True)
    parallel = run_rule_trials(ExperimentConfig(**base, jobs=2),
                               NAMED_RULES["foraging-best"], 4, collect_logs=True)
    assert len(serial) == len(parallel) == 4
    for a, b in zip(serial, parallel):
        assert a.log == b.log
        assert a.log.sensors.tobytes() == b.log.sensors.tobytes()
        assert a.log.actions.tobytes() == b.log.actions.tobytes()
        assert a.stats == b.stats


def test_bench_times_both_kernels():
    cfg = ExperimentConfig(
        task="foraging",
        width=12,
        height=12,
        n_green=4,
        n_blue=4,
        n_hidden=8,
        season_length=50,
        seasons=1,
        seed=3,
    )
    report = experiment_bench(cfg, repeats=1)
    assert set(report["seconds"]) == set(backend.available())
    assert all(t > 0 for t in report["seconds"].values())
