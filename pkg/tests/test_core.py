"""Core-type validation, the one-step dispatcher, trajectory invariants and
the properness checker."""

import math

import numpy as np
import pytest

import feemarket as fm
from feemarket.errors import DomainError, InvalidBlockSize, MissingValuations

UNIFORM = fm.ValuationDist(fm.DistKind.UNIFORM, m=215.0, w=30.0)
MARKET = fm.MarketParams(target=1.0, k=2, lam=4.0, valuation=UNIFORM)


class TestTypeValidation:
    def test_market_rejects_bad_params(self):
        with pytest.raises(DomainError):
            fm.MarketParams(target=0.0, k=2, lam=4.0, valuation=UNIFORM)
        with pytest.raises(DomainError):
            fm.MarketParams(target=1.0, k=0, lam=4.0, valuation=UNIFORM)
        with pytest.raises(DomainError):
            fm.MarketParams(target=1.0, k=2, lam=1.0, valuation=UNIFORM)

    def test_market_allows_lam_equal_k(self):
        # the reserve-rule steady-state configuration needs lam == k
        mk = fm.MarketParams(target=1.0, k=2, lam=2.0, valuation=UNIFORM)
        assert mk.block_limit == 2.0

    def test_mechanism_d_open_interval(self):
        for bad in (0.0, 1.0, 1.5, -0.1):
            with pytest.raises(DomainError, match=r"d must lie in \(0,1\)"):
                fm.MechanismSpec(fm.Rule.EIP1559, d=bad)

    def test_mechanism_ignores_irrelevant_params(self):
        # d out of range is fine for rules that never consult it
        spec = fm.MechanismSpec(fm.Rule.AMM, d=7.0, q=0.1)
        assert spec.q == 0.1

    def test_valuation_forces_exponential_shape(self):
        d = fm.ValuationDist(fm.DistKind.SHIFTED_EXPONENTIAL, m=210.0, w=5.0, a=3.0)
        assert d.a == 1.0

    def test_fee_state_bounds(self):
        with pytest.raises(DomainError):
            fm.FeeState(base_fee=0.0)
        with pytest.raises(DomainError):
            fm.FeeState(base_fee=1.0, excess_gas=-1.0)

    def test_trajectory_invariants(self):
        mech = fm.MechanismSpec(fm.Rule.EIP1559)
        with pytest.raises(DomainError):
            fm.Trajectory(
                heights=np.array([0, 2]),
                base_fees=np.array([1.0, 1.0]),
                block_sizes=np.array([1.0, 1.0]),
                market=MARKET,
                mechanism=mech,
                seed=0,
                final_fee=1.0,
            )
        with pytest.raises(DomainError):
            fm.Trajectory(
                heights=np.array([0, 1]),
                base_fees=np.array([1.0, 1.0]),
                block_sizes=np.array([1.0, 5.0]),  # above kT
                market=MARKET,
                mechanism=mech,
                seed=0,
                final_fee=1.0,
            )


class TestStepDispatcher:
    def test_eip_on_target(self):
        st = fm.FeeState(base_fee=100.0)
        spec = fm.MechanismSpec(fm.Rule.EIP1559, d=0.125)
        nxt = fm.step(st, 1.0, spec, MARKET)
        assert nxt.base_fee == 100.0
        assert nxt.height == 1
        assert nxt.excess_gas == 0.0

    def test_eip_double_target(self):
        st = fm.FeeState(base_fee=100.0)
        spec = fm.MechanismSpec(fm.Rule.EIP1559, d=0.125)
        assert fm.step(st, 2.0, spec, MARKET).base_fee == pytest.approx(112.5)

    def test_exp_empty_block(self):
        st = fm.FeeState(base_fee=100.0)
        spec = fm.MechanismSpec(fm.Rule.EXP1559, d=0.125)
        assert fm.step(st, 0.0, spec, MARKET).base_fee == pytest.approx(100 / 1.125)

    def test_invalid_block_size(self):
        st = fm.FeeState(base_fee=100.0)
        spec = fm.MechanismSpec(fm.Rule.EIP1559)
        with pytest.raises(InvalidBlockSize):
            fm.step(st, 2.5, spec, MARKET)
        with pytest.raises(InvalidBlockSize):
            fm.step(st, -0.1, spec, MARKET)

    def test_missing_valuations(self):
        st = fm.FeeState(base_fee=100.0)
        for rule in (fm.Rule.WEL, fm.Rule.TWEL):
            spec = fm.MechanismSpec(rule, alpha_wel=0.5)
            with pytest.raises(MissingValuations):
                fm.step(st, 1.0, spec, MARKET)
            # empty list is a legitimate empty block
            nxt = fm.step(st, 0.0, spec, MARKET, included_valuations=[])
            assert nxt.base_fee == pytest.approx(50.0)

    def test_egp_requires_m_at_least_fee(self):
        st = fm.FeeState(base_fee=100.0)
        spec = fm.MechanismSpec(fm.Rule.EGP_CURE, d=0.125, gamma=0.2, intensity=0.5)
        with pytest.raises(DomainError):
            fm.step(st, 1.0, spec, MARKET, min_effective_price=50.0)

    def test_amm_updates_excess(self):
        st = fm.FeeState(base_fee=0.1, excess_gas=0.0)
        spec = fm.MechanismSpec(fm.Rule.AMM, q=0.1)
        nxt = fm.step(st, 2.0, spec, MARKET)
        assert nxt.excess_gas == pytest.approx(1.0)
        assert nxt.base_fee == pytest.approx(0.1 * math.exp(0.1))

    def test_non_amm_preserves_excess(self):
        st = fm.FeeState(base_fee=100.0, excess_gas=5.0)
        spec = fm.MechanismSpec(fm.Rule.EIP1559)
        assert fm.step(st, 1.0, spec, MARKET).excess_gas == 5.0

    def test_engine_consistent_with_dispatcher(self):
        # the optimized run loop and repeated step() agree bitwise
        spec = fm.MechanismSpec(fm.Rule.EIP1559, d=0.125)
        cfg = fm.SimConfig(
            market=MARKET, mechanism=spec, b0=170.0, n_skip=0, n_iter=300
        )
        traj = fm.run(cfg)
        state = fm.FeeState(base_fee=170.0)
        for i in range(300):
            g = fm.mean_field_block_size(state.base_fee, MARKET)
            assert traj.base_fees[i] == state.base_fee
            assert traj.block_sizes[i] == g
            state = fm.step(state, g, spec, MARKET)
        assert traj.final_fee == state.base_fee

    def test_engine_consistent_with_dispatcher_amm(self):
        spec = fm.MechanismSpec(fm.Rule.AMM, q=0.1)
        mk = fm.MarketParams(target=1.0, k=2, lam=2.0, valuation=UNIFORM)
        cfg = fm.SimConfig(market=mk, mechanism=spec, b0=100.0, n_skip=0, n_iter=400)
        traj = fm.run(cfg)
        state = fm.FeeState(base_fee=100.0)
        for i in range(400):
            g = fm.mean_field_block_size(state.base_fee, mk)
            assert traj.base_fees[i] == state.base_fee
            state = fm.step(state, g, spec, mk)
        assert traj.final_fee == state.base_fee


class TestUpdateDirection:
    """sign(b' - b) matches sign(g(b) - T) under mean-field demand."""

    @pytest.mark.parametrize("rule", [fm.Rule.EIP1559, fm.Rule.EXP1559])
    def test_linear_and_exponential(self, rule):
        spec = fm.MechanismSpec(rule, d=0.2)
        for b in np.geomspace(1.0, 500.0, 60):
            g = fm.mean_field_block_size(float(b), MARKET)
            nxt = fm.step(fm.FeeState(base_fee=float(b)), g, spec, MARKET)
            if g > MARKET.target:
                assert nxt.base_fee >= b * (1 - 1e-12)
            elif g < MARKET.target:
                assert nxt.base_fee <= b * (1 + 1e-12)

    def test_amm_decrease_needs_positive_excess(self):
        spec = fm.MechanismSpec(fm.Rule.AMM, q=0.1)
        # g < T with zero excess: the fee cannot fall below q
        st = fm.FeeState(base_fee=0.1, excess_gas=0.0)
        nxt = fm.step(st, 0.0, spec, MARKET)
        assert nxt.base_fee == pytest.approx(0.1)
        # with positive excess the fee drops
        x = 20.0
        st = fm.FeeState(base_fee=0.1 * math.exp(0.1 * x), excess_gas=x)
        nxt = fm.step(st, 0.0, spec, MARKET)
        assert nxt.base_fee < st.base_fee


class TestDeterminism:
    def test_bit_identical_runs(self):
        spec = fm.MechanismSpec(fm.Rule.EIP1559, d=0.125)
        cfg = fm.SimConfig(
            market=MARKET,
            mechanism=spec,
            demand=fm.DemandMode.stochastic("poisson"),
            b0=170.0,
            seed=2024,
        )
        a, b = fm.run(cfg), fm.run(cfg)
        assert np.array_equal(a.base_fees, b.base_fees)
        assert np.array_equal(a.block_sizes, b.block_sizes)
        assert a.final_fee == b.final_fee


class TestLemma1Envelope:
    """Proper rules keep mean-field fees inside the closed-form envelope."""

    @staticmethod
    def _envelope(rule, d, b0, b_star):
        if rule is fm.Rule.EIP1559:
            return min(b0, (1 - d) * b_star), max(b0, (1 + d) * b_star)
        return min(b0, b_star / (1 + d)), max(b0, (1 + d) * b_star)

    @pytest.mark.parametrize("rule", [fm.Rule.EIP1559, fm.Rule.EXP1559])
    def test_envelope_random_configs(self, rule):
        rng = np.random.default_rng(31337)
        kinds = [
            fm.DistKind.UNIFORM,
            fm.DistKind.NORMAL,
            fm.DistKind.SHIFTED_GAMMA,
            fm.DistKind.SHIFTED_EXPONENTIAL,
        ]
        for _ in range(12):
            dist = fm.ValuationDist(
                kind=kinds[rng.integers(len(kinds))],
                m=float(rng.uniform(150, 250)),
                w=float(rng.uniform(2, 30)),
                a=float(rng.uniform(0.5, 2.0)),
            )
            mk = fm.MarketParams(
                target=1.0, k=2, lam=float(rng.uniform(2.5, 8.0)), valuation=dist
            )
            d = float(rng.uniform(0.01, 0.5))
            b_star = fm.market_clearing_price(mk)
            b0 = float(rng.uniform(0.2 * b_star, 5.0 * b_star))
            cfg = fm.SimConfig(
                market=mk,
                mechanism=fm.MechanismSpec(rule, d=d),
                b0=b0,
                n_skip=0,
                n_iter=2000,
            )
            traj = fm.run(cfg)
            lo, hi = self._envelope(rule, d, b0, b_star)
            assert traj.base_fees.min() >= lo * (1 - 1e-9)
            assert traj.base_fees.max() <= hi * (1 + 1e-9)


class TestCheckProperness:
    PROBES = list(np.geomspace(1.0, 900.0, 41))

    def test_eip_passes(self):
        spec = fm.MechanismSpec(fm.Rule.EIP1559, d=0.125)
        rep = fm.check_properness(spec, MARKET, self.PROBES)
        assert rep.a1_ok is True
        assert rep.a2_ok is True
        # upside ratio 1+d; two-sided constant 1/(1-d) from empty blocks
        assert rep.alpha_up == pytest.approx(1.125)
        assert rep.alpha == pytest.approx(1.0 / 0.875)

    def test_exp_passes_with_symmetric_alpha(self):
        spec = fm.MechanismSpec(fm.Rule.EXP1559, d=0.125)
        rep = fm.check_properness(spec, MARKET, self.PROBES)
        assert rep.a1_ok is True
        assert rep.a2_ok is True
        assert rep.alpha_up == pytest.approx(1.125)
        assert rep.alpha == pytest.approx(1.125)

    def test_amm_passes_direction(self):
        spec = fm.MechanismSpec(fm.Rule.AMM, q=0.1)
        mk = fm.MarketParams(target=1.0, k=2, lam=2.0, valuation=UNIFORM)
        rep = fm.check_properness(spec, mk, self.PROBES)
        assert rep.a1_ok is True

    def test_egp_decrease_violation_witnessed(self):
        # probe fees with under-target blocks (g < T) where every included
        # transaction may pay near the valuation bound: a strong-enough
        # correction then refuses to lower the fee
        spec = fm.MechanismSpec(
            fm.Rule.EGP_CURE, d=0.125, gamma=0.01, intensity=10.0
        )
        probes = [224.0, 226.0, 228.0]
        rep = fm.check_properness(spec, MARKET, probes)
        assert rep.a1_ok is False
        assert rep.a1_violations
        wit = rep.a1_violations[0]
        assert wit.block_size < MARKET.target
        assert wit.worst_case_fee > wit.fee
        assert rep.a2_ok is False
        assert rep.a2_prime_ok is True
        assert rep.a2_prime_alpha == pytest.approx(1.125 + 10.0 * 1.01)
        assert rep.a2_prime_beta == pytest.approx(2300.0)

    def test_welfare_rules_direction_not_applicable(self):
        spec = fm.MechanismSpec(fm.Rule.WEL, alpha_wel=0.5)
        rep = fm.check_properness(spec, MARKET, self.PROBES)
        assert rep.a1_applicable is False
        assert rep.a1_ok is None
        assert rep.a2_prime_alpha == pytest.approx(2.0)

    def test_rejects_bad_probes(self):
        spec = fm.MechanismSpec(fm.Rule.EIP1559)
        with pytest.raises(DomainError):
            fm.check_properness(spec, MARKET, [])
        with pytest.raises(DomainError):
            fm.check_properness(spec, MARKET, [-1.0])
