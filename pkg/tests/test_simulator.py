import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inferplan.analyzer import Phase, Task
from inferplan.catalog import HardwareSpec
from inferplan.simulator import (
    ParallelConfig,
    compute_time,
    get_configurations,
    is_compute_bound,
    rank_configs,
    rw_time,
    simulate_hybrid,
    task_time,
    tp_sync_bytes,
    tp_sync_count,
    transfer_time,
)


def make_gpu(**overrides) -> HardwareSpec:
    base = dict(
        name="g", peak_compute=2e12, memory_capacity=80e9, memory_bandwidth=4e9,
        comm_bandwidth=1e9, comm_latency=1e-6, unit_price=100.0,
    )
    base.update(overrides)
    return HardwareSpec(**base)


def make_task(**overrides) -> Task:
    base = dict(
        phase=Phase.PREFILL, compute_load=4e12, data_size=8e9,
        data_transferred=2e9, token_count=4, batch_size=4,
        layer_sync_bytes=0.0, num_layers=1,
    )
    base.update(overrides)
    return Task(**base)


class TestTimeComponents:
    def test_compute_time(self):
        g = make_gpu(peak_compute=1e12)
        t = make_task(compute_load=2e12)
        assert compute_time(t, g, 1) == 2.0
        assert compute_time(t, g, 2) == 1.0
        assert compute_time(make_task(compute_load=0.0), g, 1) == 0.0

    def test_rw_time(self):
        g = make_gpu(memory_bandwidth=4e9)
        t = make_task(data_size=8e9)
        assert rw_time(t, g, 1) == 2.0
        assert rw_time(t, g, 2) == 1.0
        assert rw_time(make_task(data_size=0.0), g, 1) == 0.0

    def test_transfer_without_tp(self):
        g = make_gpu(comm_bandwidth=1e9)
        t = make_task(data_transferred=2e9, layer_sync_bytes=1e6, num_layers=4)
        assert transfer_time(t, g, 1) == 2.0  # no allreduce, no latency at tp=1

    def test_ring_allreduce_volume_frozen(self):
        # 2 allreduces x 2*(tp-1)/tp x B*tokens*H*weight_bytes, one layer:
        # B=1, tokens=128, H=4096, 2-byte activations at tp=2 -> 2 MiB
        t = make_task(layer_sync_bytes=float(1 * 128 * 4096 * 2), num_layers=1)
        assert tp_sync_bytes(t, 2) == 2_097_152
        assert tp_sync_bytes(t, 1) == 0.0

    def test_ring_volume_monotone_in_tp(self):
        t = make_task(layer_sync_bytes=1e6, num_layers=2)
        assert tp_sync_bytes(t, 4) > tp_sync_bytes(t, 2)

    def test_sync_message_count(self):
        t = make_task(num_layers=8)
        assert tp_sync_count(t, 1) == 0
        assert tp_sync_count(t, 2) == 16
        assert tp_sync_count(t, 8) == 48

    def test_task_time_sums_three_components(self):
        g = make_gpu()  # 2 TFLOP/s, 4 GB/s mem, 1 GB/s comm
        t = make_task()  # 4 TFLOP, 8 GB rw, 2 GB transferred
        assert task_time(t, g, 1) == 6.0

    def test_zero_task(self):
        t = make_task(compute_load=0.0, data_size=0.0, data_transferred=0.0,
                      token_count=0, batch_size=1)
        assert task_time(t, make_gpu(), 1) == 0.0

    def test_compute_bound_classification(self):
        g = make_gpu()
        assert is_compute_bound(make_task(compute_load=100e12, data_size=1e6), g)
        assert not is_compute_bound(make_task(compute_load=1e9, data_size=8e9), g)

    @given(
        load=st.floats(0, 1e15), data=st.floats(0, 1e12), xfer=st.floats(0, 1e12),
        tp=st.sampled_from([1, 2, 4, 8]),
    )
    def test_roofline_lower_bound(self, load, data, xfer, tp):
        g = make_gpu()
        t = make_task(compute_load=load, data_size=data, data_transferred=xfer,
                      layer_sync_bytes=1e5, num_layers=3)
        total = task_time(t, g, tp)
        assert total >= compute_time(t, g, tp)
        assert total >= rw_time(t, g, tp)
        assert total >= transfer_time(t, g, tp)
        assert total >= max(compute_time(t, g, tp), rw_time(t, g, tp))

    def test_overlap_variant_never_slower(self):
        g = make_gpu()
        t = make_task()
        assert task_time(t, g, 1, overlap=True) <= task_time(t, g, 1)
        assert task_time(t, g, 1, overlap=True) == 4.0  # max(2,2) + 2

    def test_faster_hardware_never_slower(self):
        g = make_gpu()
        t = make_task(layer_sync_bytes=1e6, num_layers=2)
        for field in ("peak_compute", "memory_bandwidth", "comm_bandwidth"):
            faster = make_gpu(**{field: getattr(g, field) * 2})
            assert task_time(t, faster, 2) <= task_time(t, g, 2)


class TestConfigurations:
    def test_single_gpu(self):
        assert [(c.dp, c.tp) for c in get_configurations(1)] == [(1, 1)]

    def test_four_gpus(self):
        got = {(c.dp, c.tp) for c in get_configurations(4)}
        assert got == {(1, 1), (1, 2), (1, 4), (2, 1), (2, 2), (3, 1), (4, 1)}

    def test_two_gpus(self):
        got = {(c.dp, c.tp) for c in get_configurations(2)}
        assert got == {(1, 1), (1, 2), (2, 1)}

    def test_deterministic_order(self):
        pairs = [(c.dp, c.tp) for c in get_configurations(8)]
        assert pairs == sorted(pairs)

    @pytest.mark.parametrize("n", range(1, 9))
    def test_matches_constraint_scan(self, n):
        got = {(c.dp, c.tp) for c in get_configurations(n)}
        expected = set()
        for dp in range(1, n + 1):
            for tp in (1, 2, 4, 8):
                if dp * tp <= n:
                    expected.add((dp, tp))
        assert got == expected

    def test_power_of_two_enforced(self):
        with pytest.raises(ValueError):
            ParallelConfig(dp=1, tp=3)

    def test_gpus_used(self):
        assert ParallelConfig(dp=3, tp=2).gpus_used == 6


class TestSimulateHybrid:
    def test_degenerate_config_is_sequential_sum(self):
        g = make_gpu()
        tasks = [make_task(), make_task(phase=Phase.DECODE, compute_load=1e12,
                                        data_size=2e9, data_transferred=0.0,
                                        token_count=4, batch_size=4)]
        sim = simulate_hybrid(tasks, ParallelConfig(1, 1), g)
        expected = sum(task_time(t, g, 1) for t in tasks)
        assert sim.total_time == pytest.approx(expected, rel=1e-12)
        assert sim.total_time == sim.prefill.seconds + sim.decode.seconds

    def test_even_dp_split_halves_time(self):
        # zero comm terms: replicas are identical, so dp=2 halves the work
        g = make_gpu(comm_latency=1e-30)
        t = make_task(data_transferred=0.0, batch_size=4, token_count=4)
        solo = simulate_hybrid([t], ParallelConfig(1, 1), g)
        dp2 = simulate_hybrid([t], ParallelConfig(2, 1), g)
        assert dp2.prefill.seconds == pytest.approx(
            solo.prefill.seconds / 2 + 1e-30, rel=1e-9)

    def test_uneven_shards_follow_larger(self):
        g = make_gpu(comm_latency=1e-30)
        t = make_task(batch_size=3, token_count=3, data_transferred=0.0)
        sim = simulate_hybrid([t], ParallelConfig(2, 1), g)
        # shards of 2 and 1; the 2/3 shard dominates
        expected = (2 / 3) * task_time(t, g, 1)
        assert sim.prefill.seconds == pytest.approx(expected + 1e-30, rel=1e-9)

    def test_dp_latency_added_once_per_phase(self):
        g = make_gpu(comm_latency=0.5)
        t = make_task(batch_size=4, token_count=4, data_transferred=0.0)
        solo = simulate_hybrid([t], ParallelConfig(1, 1), g)
        dp2 = simulate_hybrid([t], ParallelConfig(2, 1), g)
        assert dp2.prefill.seconds == pytest.approx(solo.prefill.seconds / 2 + 0.5)
        assert dp2.decode.seconds == 0.0  # empty phase pays no sync

    def test_fleet_limit_enforced(self):
        with pytest.raises(ValueError, match="4 GPUs"):
            simulate_hybrid([make_task()], ParallelConfig(2, 2), make_gpu(),
                            fleet_size=3)

    def test_empty_task_list_rejected(self):
        with pytest.raises(ValueError):
            simulate_hybrid([], ParallelConfig(1, 1), make_gpu())

    def test_tp_communication_strictly_grows(self):
        g = make_gpu()
        t = make_task(layer_sync_bytes=1e6, num_layers=4)
        sims = {tp: simulate_hybrid([t], ParallelConfig(1, tp), g)
                for tp in (1, 2, 4)}
        assert sims[1].prefill.comm_seconds < sims[2].prefill.comm_seconds
        assert sims[2].prefill.comm_seconds < sims[4].prefill.comm_seconds


class TestRanking:
    def _result(self, total, dp, tp):
        g = make_gpu(peak_compute=1e12, memory_bandwidth=1e18, comm_bandwidth=1e18)
        t = make_task(compute_load=total * 1e12, data_size=0.0, data_transferred=0.0,
                      batch_size=1, token_count=1)
        return simulate_hybrid([t], ParallelConfig(dp, tp), g)

    def test_sorted_ascending(self):
        results = [self._result(3, 1, 1), self._result(1, 1, 1), self._result(2, 1, 1)]
        ranked = rank_configs(results, 3)
        assert [round(r.total_time) for r in ranked] == [1, 2, 3]

    def test_tie_prefers_fewer_gpus(self):
        g = make_gpu()
        t = make_task(compute_load=0.0, data_size=0.0, data_transferred=0.0,
                      batch_size=1, token_count=1)
        four = simulate_hybrid([t], ParallelConfig(4, 1), g)
        two = simulate_hybrid([t], ParallelConfig(2, 1), g)
        assert four.total_time == two.total_time  # both pay one sync latency
        assert rank_configs([four, two], 1)[0].config.gpus_used == 2

    def test_k_larger_than_list(self):
        results = [self._result(2, 1, 1), self._result(1, 1, 1)]
        assert len(rank_configs(results, 10)) == 2


@given(
    loads=st.lists(st.floats(1e9, 1e14), min_size=1, max_size=6),
    scale=st.sampled_from([2.0, 4.0]),
    field=st.sampled_from(["peak_compute", "memory_bandwidth", "comm_bandwidth"]),
    dp=st.integers(1, 4), tp=st.sampled_from([1, 2]),
)
@settings(max_examples=60)
def test_hardware_monotonicity_property(loads, scale, field, dp, tp):
    if dp * tp > 8:
        return
    base = make_gpu()
    faster = make_gpu(**{field: getattr(base, field) * scale})
    tasks = [make_task(compute_load=load, data_size=load / 10, data_transferred=load / 100,
                       batch_size=8, token_count=8, layer_sync_bytes=1e5, num_layers=2)
             for load in loads]
    cfg = ParallelConfig(dp, tp)
    assert simulate_hybrid(tasks, cfg, faster).total_time <= \
        simulate_hybrid(tasks, cfg, base).total_time
