import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inferplan.analyzer import (
    Framework,
    MemoryBudget,
    OptimizationFlags,
    SchedulerConfig,
    WorkloadSpec,
    generate_task_list,
    kv_bytes_without_batch,
)
from inferplan.catalog import Catalog, CatalogError, HardwareSpec, ModelSpec, model_weight_bytes
from inferplan.engine import (
    Objective,
    PlanRequest,
    PrecisionTolerance,
    available_memory,
    max_parallelism,
    multi_gpu_throughput,
    plan,
    residency_tokens,
    single_gpu_throughput,
    tpot,
    ttft,
)
from inferplan.simulator import ParallelConfig, get_configurations, simulate_hybrid


def make_model(**overrides) -> ModelSpec:
    base = dict(
        name="m7b", num_layers=4, hidden_size=256, num_heads=4, num_kv_heads=4,
        ffn_size=512, vocab_size=1000, weight_bytes=2, kv_bytes=2,
        param_count_override=7_000_000_000,
    )
    base.update(overrides)
    return ModelSpec(**base)


def make_gpu(**overrides) -> HardwareSpec:
    base = dict(
        name="g80", peak_compute=300e12, memory_capacity=80e9,
        memory_bandwidth=2e12, comm_bandwidth=600e9, comm_latency=5e-6,
        unit_price=15000.0,
    )
    base.update(overrides)
    return HardwareSpec(**base)


def make_catalog(gpus=None, models=None) -> Catalog:
    gpus = gpus or [make_gpu()]
    models = models or [make_model()]
    return Catalog(gpus={g.name: g for g in gpus}, models={m.name: m for m in models})


class TestStepOne:
    def test_available_memory(self):
        g = make_gpu(memory_capacity=80e9)
        m = make_model(param_count_override=7_000_000_000, weight_bytes=2)
        assert available_memory(g, m, 1) == 80e9 - 14e9

    def test_tp_halves_weight_slice(self):
        g = make_gpu(memory_capacity=80e9)
        m = make_model(param_count_override=7_000_000_000, weight_bytes=2)
        assert available_memory(g, m, 2) == 80e9 - 7e9

    def test_oversized_weights_infeasible(self):
        g = make_gpu(memory_capacity=10e9)
        m = make_model(param_count_override=7_000_000_000, weight_bytes=2)
        assert available_memory(g, m, 1) < 0
        assert max_parallelism(g, m, 1, 1, 128) == 0

    def test_dp_one_reduces_to_max_batch(self):
        g, m = make_gpu(), make_model()
        avail = available_memory(g, m, 1)
        expected = int(avail // kv_bytes_without_batch(m, 512))
        assert max_parallelism(g, m, 1, 1, 512) == expected

    def test_dp_doubles_parallelism(self):
        g, m = make_gpu(), make_model()
        assert max_parallelism(g, m, 2, 1, 512) == 2 * max_parallelism(g, m, 1, 1, 512)

    def test_exact_quotient(self):
        m = make_model(param_count_override=1, weight_bytes=1)
        per = kv_bytes_without_batch(m, 64)
        g = make_gpu(memory_capacity=5 * per + 1)  # +1 covers the 1-byte weights
        assert max_parallelism(g, m, 2, 1, 64) == 10
        assert max_parallelism(g, m, 2, 1, 64) // 2 == 5  # per-replica batch

    def test_residency_includes_output(self):
        assert residency_tokens(512, 128, OptimizationFlags()) == 640

    def test_residency_h2o_keeps_fraction(self):
        opts = OptimizationFlags(h2o=True, h2o_keep_ratio=0.25)
        # decode-time cache is 0.25 * 640 = 160, but prefill still holds 512
        assert residency_tokens(512, 128, opts) == 512
        tall = OptimizationFlags(h2o=True, h2o_keep_ratio=0.9)
        assert residency_tokens(512, 128, tall) == math.ceil(0.9 * 640)

    def test_residency_block_rounding(self):
        assert residency_tokens(510, 1, OptimizationFlags(), block_tokens=16) == 512


class TestMetrics:
    def _sim(self, tasks_model=None, workload=None, cfg=ParallelConfig(1, 1)):
        m = tasks_model or make_model()
        g = make_gpu()
        w = workload or WorkloadSpec(2, 128, 4)
        budget = MemoryBudget.from_capacity(g.memory_capacity, model_weight_bytes(m))
        tasks = generate_task_list(m, w, budget)
        return simulate_hybrid(tasks, cfg, g), tasks, g

    def test_ttft_is_prefill_phase(self):
        sim, tasks, g = self._sim()
        assert ttft(sim) == sim.prefill.seconds

    def test_ttft_sums_chunked_prefill(self):
        from inferplan.simulator import task_time
        from inferplan.analyzer import Phase
        m = make_model()
        g = make_gpu()
        w = WorkloadSpec(1, 1024, 1, Framework.SPLIT_FUSE)
        budget = MemoryBudget.from_capacity(g.memory_capacity, model_weight_bytes(m))
        tasks = generate_task_list(m, w, budget, SchedulerConfig(seq_chunk_tokens=256))
        chunks = [t for t in tasks if t.phase is Phase.PREFILL]
        assert len(chunks) == 4
        sim = simulate_hybrid(tasks, ParallelConfig(1, 1), g)
        assert ttft(sim) == pytest.approx(sum(task_time(t, g, 1) for t in chunks),
                                          rel=1e-12)

    def test_tpot_divides_decode(self):
        sim, _, _ = self._sim(workload=WorkloadSpec(2, 128, 100))
        assert tpot(sim, 100) == pytest.approx(sim.decode.seconds / 100)
        single = self._sim(workload=WorkloadSpec(2, 128, 1))[0]
        assert tpot(single, 1) == single.decode.seconds

    def test_tpot_guards(self):
        sim, _, _ = self._sim()
        with pytest.raises(ValueError):
            tpot(sim, 0)

    def test_single_gpu_throughput(self):
        assert single_gpu_throughput(0.05) == pytest.approx(20.0)
        assert single_gpu_throughput(1.0) == 1.0
        with pytest.raises(ValueError):
            single_gpu_throughput(0.0)

    def test_multi_gpu_throughput_examples(self):
        assert multi_gpu_throughput(2, 100.0, 2) == pytest.approx(100.0)
        assert multi_gpu_throughput(4, 50.0, 4) == pytest.approx(200.0 / 3.0)
        assert multi_gpu_throughput(5, 7.0, 1) == pytest.approx(35.0)

    def test_multi_gpu_requires_power_of_two(self):
        with pytest.raises(ValueError):
            multi_gpu_throughput(6, 10.0, 6)

    @given(n=st.integers(1, 64), t=st.floats(1e-3, 1e5))
    def test_tp1_identity(self, n, t):
        assert multi_gpu_throughput(n, t, 1) == pytest.approx(n * t, rel=1e-12)

    @given(t=st.floats(1e-6, 1e3))
    def test_reciprocal_identity(self, t):
        assert single_gpu_throughput(t) * t == pytest.approx(1.0, rel=1e-12)


class TestPlanSearch:
    def test_budget_below_cheapest_gpu(self):
        cat = make_catalog()
        req = PlanRequest("m7b", budget=100.0, prompt_len=128, output_len=8)
        result = plan(req, cat)
        assert result.plans == []
        assert result.binding_constraint == "budget"

    def test_unknown_model_raises(self):
        cat = make_catalog()
        with pytest.raises(CatalogError, match="nope"):
            plan(PlanRequest("nope", 1e5, 128, 8), cat)

    def test_degenerate_search_matches_direct_simulation(self):
        cat = make_catalog()
        g, m = cat.gpus["g80"], cat.models["m7b"]
        req = PlanRequest("m7b", budget=20000.0, prompt_len=128, output_len=8,
                          batch_size=2, framework=Framework.DYN_BATCHING)
        result = plan(req, cat, fleet_max=1)
        assert result.plans
        best = result.plans[0]
        assert (best.gpu_count, best.dp, best.tp) == (1, 1, 1)

        budget = MemoryBudget.from_capacity(g.memory_capacity, model_weight_bytes(m))
        tasks = generate_task_list(
            m, WorkloadSpec(2, 128, 8, Framework.DYN_BATCHING,
                            best.optimizations), budget)
        sim = simulate_hybrid(tasks, ParallelConfig(1, 1), g)
        assert best.metrics.batch_latency == pytest.approx(sim.total_time, rel=1e-12)

    @pytest.mark.parametrize("fleet_max", [2, 8])
    def test_matches_exhaustive_oracle(self, fleet_max):
        # independent straight-line re-evaluation over the whole space
        gpus = [make_gpu(name="big", unit_price=15000.0),
                make_gpu(name="small", memory_capacity=24e9, peak_compute=150e12,
                         memory_bandwidth=1e12, comm_bandwidth=32e9,
                         comm_latency=1e-5, unit_price=1600.0)]
        m = make_model(param_count_override=800_000_000)
        cat = make_catalog(gpus=gpus, models=[m])
        req = PlanRequest("m7b", budget=32000.0, prompt_len=256, output_len=16,
                          batch_size=8)
        got = plan(req, cat, fleet_max=fleet_max)

        candidates = []
        for g in sorted(gpus, key=lambda g: g.name):
            n_max = min(fleet_max, int(req.budget // g.unit_price))
            if n_max < 1:
                continue
            for cfg in get_configurations(n_max):
                for fw in (Framework.DYN_BATCHING, Framework.SPLIT_FUSE):
                    for opts in (OptimizationFlags(),
                                 OptimizationFlags(flash_attention=True)):
                        weights = model_weight_bytes(m)
                        avail = g.memory_capacity - weights / cfg.tp
                        if avail <= 0:
                            continue
                        resident = req.prompt_len + req.output_len
                        per = kv_bytes_without_batch(m, resident)
                        b_max = int(avail // per)
                        if b_max < 1:
                            continue
                        batch = min(req.batch_size, cfg.dp * b_max)
                        budget = MemoryBudget.from_capacity(
                            cfg.dp * g.memory_capacity, cfg.dp * weights / cfg.tp)
                        tasks = generate_task_list(
                            m, WorkloadSpec(batch, req.prompt_len, req.output_len,
                                            fw, opts), budget)
                        sim = simulate_hybrid(tasks, cfg, g)
                        candidates.append((sim.total_time, cfg.gpus_used * g.unit_price,
                                           cfg.gpus_used, g.name, cfg.dp, cfg.tp,
                                           fw.value, opts.flash_attention))
        candidates.sort()
        best = got.plans[0]
        assert best.metrics.batch_latency == pytest.approx(candidates[0][0], rel=1e-12)
        assert (best.gpu, best.dp, best.tp) == (candidates[0][3], candidates[0][4],
                                                candidates[0][5])

    def test_all_plans_within_budget(self):
        cat = make_catalog()
        req = PlanRequest("m7b", budget=50000.0, prompt_len=128, output_len=8,
                          batch_size=4)
        for p in plan(req, cat).plans:
            assert p.cost <= req.budget
            assert p.dp * p.tp == p.gpu_count
            assert p.metrics.memory_per_gpu <= cat.gpus[p.gpu].memory_capacity

    def test_larger_budget_never_worse(self):
        cat = make_catalog(gpus=[make_gpu(), make_gpu(name="cheap", unit_price=2000.0,
                                                      memory_capacity=24e9,
                                                      peak_compute=150e12,
                                                      memory_bandwidth=1e12,
                                                      comm_bandwidth=32e9)])
        latencies = []
        for budget in (2000.0, 16000.0, 120000.0):
            req = PlanRequest("m7b", budget=budget, prompt_len=256, output_len=16,
                              batch_size=8)
            result = plan(req, cat)
            assert result.plans
            latencies.append(result.plans[0].metrics.batch_latency)
        assert latencies == sorted(latencies, reverse=True)

    def test_metric_consistency(self):
        cat = make_catalog()
        req = PlanRequest("m7b", budget=61000.0, prompt_len=200, output_len=32,
                          batch_size=4)
        for p in plan(req, cat).plans:
            assert p.metrics.batch_latency == pytest.approx(
                p.metrics.ttft + p.metrics.tpot * req.output_len, rel=1e-9)

    def test_objective_max_throughput(self):
        cat = make_catalog()
        req = PlanRequest("m7b", budget=125000.0, prompt_len=128, output_len=16,
                          batch_size=16, objective=Objective.MAX_THROUGHPUT)
        result = plan(req, cat)
        assert result.plans
        throughputs = [p.metrics.throughput for p in result.plans]
        assert throughputs == sorted(throughputs, reverse=True)

    def test_throughput_floor_binds(self):
        cat = make_catalog()
        req = PlanRequest("m7b", budget=16000.0, prompt_len=128, output_len=8,
                          throughput_floor=1e12)
        result = plan(req, cat)
        assert result.plans == []
        assert result.binding_constraint == "throughput_floor"

    def test_latency_ceiling_binds(self):
        cat = make_catalog()
        req = PlanRequest("m7b", budget=16000.0, prompt_len=128, output_len=8,
                          latency_ceiling=1e-9)
        result = plan(req, cat)
        assert result.plans == []
        assert result.binding_constraint == "latency_ceiling"

    def test_strict_precision_never_uses_h2o(self):
        cat = make_catalog()
        req = PlanRequest("m7b", budget=50000.0, prompt_len=128, output_len=8,
                          precision_tolerance=PrecisionTolerance.STRICT)
        assert all(not p.optimizations.h2o for p in plan(req, cat).plans)

    def test_relaxed_precision_searches_h2o(self):
        cat = make_catalog()
        req = PlanRequest("m7b", budget=50000.0, prompt_len=128, output_len=64,
                          batch_size=8,
                          precision_tolerance=PrecisionTolerance.RELAXED)
        result = plan(req, cat)
        # h2o cuts decode KV reads, so with a long decode it wins on latency
        assert any(p.optimizations.h2o for p in result.plans)

    def test_workers_do_not_change_results(self):
        cat = make_catalog()
        req = PlanRequest("m7b", budget=61000.0, prompt_len=128, output_len=8,
                          batch_size=4)
        assert plan(req, cat, workers=4) == plan(req, cat)

    def test_top_k_limit(self):
        cat = make_catalog()
        req = PlanRequest("m7b", budget=125000.0, prompt_len=128, output_len=8)
        assert len(plan(req, cat).plans) == 3


class TestPlanRequestValidation:
    def test_budget_positive(self):
        with pytest.raises(ValueError):
            PlanRequest("m", budget=0.0, prompt_len=1, output_len=1)

    def test_lengths_positive(self):
        with pytest.raises(ValueError):
            PlanRequest("m", budget=1.0, prompt_len=0, output_len=1)
        with pytest.raises(ValueError):
            PlanRequest("m", budget=1.0, prompt_len=1, output_len=0)
