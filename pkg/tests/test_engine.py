"""Engine behavior: regimes, recording windows, RNG stream stability and
floor handling."""

import numpy as np
import pytest

import feemarket as fm
from feemarket.errors import DomainError

GAMMA_WIDE = fm.ValuationDist(fm.DistKind.SHIFTED_GAMMA, m=220.0, w=10.0, a=1.0)
NORMAL = fm.ValuationDist(fm.DistKind.NORMAL, m=210.0, w=10.0)
MK_GAMMA = fm.MarketParams(target=1.0, k=2, lam=4.0, valuation=GAMMA_WIDE)
MK_NORMAL = fm.MarketParams(target=1.0, k=2, lam=4.0, valuation=NORMAL)


class TestRun:
    def test_convergent_regime_reaches_clearing_price(self):
        # wide-tailed demand contracts at small step sizes
        cfg = fm.SimConfig(
            market=MK_GAMMA,
            mechanism=fm.MechanismSpec(fm.Rule.EIP1559, d=0.05),
            b0=170.0,
            n_skip=0,
            n_iter=3000,
        )
        traj = fm.run(cfg)
        b_star = fm.market_clearing_price(MK_GAMMA)
        assert abs(traj.final_fee - b_star) <= 1e-3 * b_star

    def test_on_target_demand_is_constant(self):
        # uniform [200, 230] with lam=2 clears exactly at 215 in floats,
        # so g == T and the fee never moves
        uni = fm.ValuationDist(fm.DistKind.UNIFORM, m=215.0, w=30.0)
        mk = fm.MarketParams(target=1.0, k=2, lam=2.0, valuation=uni)
        cfg = fm.SimConfig(
            market=mk,
            mechanism=fm.MechanismSpec(fm.Rule.EXP1559, d=0.125),
            b0=215.0,
            n_skip=0,
            n_iter=200,
        )
        traj = fm.run(cfg)
        assert np.all(traj.base_fees == 215.0)
        assert np.all(traj.block_sizes == 1.0)
        assert traj.final_fee == 215.0

    def test_recording_window(self):
        cfg = fm.SimConfig(
            market=MK_NORMAL,
            mechanism=fm.MechanismSpec(fm.Rule.EIP1559, d=0.125),
            b0=170.0,
            n_skip=200,
            n_iter=100,
        )
        traj = fm.run(cfg)
        assert len(traj) == 100
        assert traj.heights[0] == 200
        assert traj.heights[-1] == 299
        full = fm.run(cfg, record_all=True)
        assert len(full) == 300
        np.testing.assert_array_equal(full.base_fees[200:], traj.base_fees)

    def test_skip_does_not_shift_the_stream(self):
        # recorded values at absolute heights are independent of n_skip
        base = dict(
            market=MK_NORMAL,
            mechanism=fm.MechanismSpec(fm.Rule.EIP1559, d=0.125),
            demand=fm.DemandMode.stochastic("poisson"),
            b0=170.0,
            seed=7,
        )
        a = fm.run(fm.SimConfig(n_skip=100, n_iter=50, **base))
        b = fm.run(fm.SimConfig(n_skip=120, n_iter=30, **base))
        np.testing.assert_array_equal(a.base_fees[20:], b.base_fees)
        np.testing.assert_array_equal(a.block_sizes[20:], b.block_sizes)

    def test_seed_moves_stochastic_but_not_mean_field(self):
        mech = fm.MechanismSpec(fm.Rule.EIP1559, d=0.125)
        mf = dict(market=MK_NORMAL, mechanism=mech, b0=170.0)
        t1 = fm.run(fm.SimConfig(seed=1, **mf))
        t2 = fm.run(fm.SimConfig(seed=2, **mf))
        np.testing.assert_array_equal(t1.base_fees, t2.base_fees)

        stoch = dict(
            market=MK_NORMAL,
            mechanism=mech,
            demand=fm.DemandMode.stochastic("poisson"),
            b0=170.0,
        )
        s1 = fm.run(fm.SimConfig(seed=1, **stoch))
        s2 = fm.run(fm.SimConfig(seed=2, **stoch))
        assert not np.array_equal(s1.block_sizes, s2.block_sizes)

    def test_stream_ids_are_independent(self):
        cfg = fm.SimConfig(
            market=MK_NORMAL,
            mechanism=fm.MechanismSpec(fm.Rule.EIP1559, d=0.125),
            demand=fm.DemandMode.stochastic("poisson"),
            b0=170.0,
            seed=7,
        )
        a = fm.run(cfg, stream_id=0)
        b = fm.run(cfg, stream_id=1)
        assert not np.array_equal(a.block_sizes, b.block_sizes)

    def test_fees_respect_floor(self):
        # demand vanishes above the support, so the fee decays to the floor
        mech = fm.MechanismSpec(fm.Rule.EIP1559, d=0.5, fee_floor=1e-6)
        tiny = fm.ValuationDist(fm.DistKind.UNIFORM, m=1e-4, w=1e-4)
        mk = fm.MarketParams(target=1.0, k=2, lam=4.0, valuation=tiny)
        cfg = fm.SimConfig(
            market=mk, mechanism=mech, b0=100.0, n_skip=0, n_iter=200
        )
        traj = fm.run(cfg)
        assert traj.base_fees.min() >= 1e-6
        assert traj.final_fee >= 1e-6

    def test_wel_rules_run_in_both_modes(self):
        for rule in (fm.Rule.WEL, fm.Rule.TWEL):
            mech = fm.MechanismSpec(rule, alpha_wel=0.3, delta=0.1)
            for mode in (fm.MEAN_FIELD, fm.DemandMode.stochastic("poisson")):
                cfg = fm.SimConfig(
                    market=MK_NORMAL,
                    mechanism=mech,
                    demand=mode,
                    b0=150.0,
                    n_skip=0,
                    n_iter=50,
                )
                traj = fm.run(cfg)
                assert np.all(traj.base_fees > 0)

    def test_egpcure_stochastic_uses_min_included(self):
        mech = fm.MechanismSpec(
            fm.Rule.EGP_CURE, d=0.125, gamma=0.1, intensity=0.5
        )
        cfg = fm.SimConfig(
            market=MK_NORMAL,
            mechanism=mech,
            demand=fm.DemandMode.stochastic("poisson"),
            b0=150.0,
            seed=3,
            n_skip=0,
            n_iter=300,
        )
        traj = fm.run(cfg)
        assert np.all(traj.base_fees >= mech.fee_floor)

    def test_config_validation(self):
        mech = fm.MechanismSpec(fm.Rule.EIP1559)
        with pytest.raises(DomainError):
            fm.SimConfig(market=MK_NORMAL, mechanism=mech, b0=0.0)
        with pytest.raises(DomainError):
            fm.SimConfig(market=MK_NORMAL, mechanism=mech, n_iter=0)


class TestRunAverage:
    def test_matches_recorded_run(self):
        cfg = fm.SimConfig(
            market=MK_NORMAL,
            mechanism=fm.MechanismSpec(fm.Rule.EIP1559, d=0.125),
            b0=170.0,
            n_skip=200,
            n_iter=100,
        )
        avgs = fm.run_average(cfg, long_n=5_000)
        traj = fm.run(
            fm.SimConfig(
                market=cfg.market,
                mechanism=cfg.mechanism,
                b0=cfg.b0,
                n_skip=200,
                n_iter=4_800,
            )
        )
        assert avgs.avg_block_size == pytest.approx(
            float(np.mean(traj.block_sizes)), rel=1e-12
        )
        assert avgs.avg_base_fee == pytest.approx(
            float(np.mean(traj.base_fees)), rel=1e-12
        )

    def test_convergent_regime_average_is_target(self):
        # fixed-point regime: after burn-in every block is on target
        cfg = fm.SimConfig(
            market=MK_GAMMA,
            mechanism=fm.MechanismSpec(fm.Rule.EIP1559, d=0.05),
            b0=170.0,
            n_skip=200,
        )
        avgs = fm.run_average(cfg, long_n=20_000)
        assert avgs.avg_block_size == pytest.approx(1.0, abs=1e-4)

    def test_exponential_average_hits_target(self):
        cfg = fm.SimConfig(
            market=MK_NORMAL,
            mechanism=fm.MechanismSpec(fm.Rule.EXP1559, d=0.125),
            b0=100.0,
            n_skip=200,
        )
        avgs = fm.run_average(cfg, long_n=100_000)
        assert avgs.avg_block_size == pytest.approx(1.0, abs=1e-2)

    def test_fee_slightly_undershoots_clearing_price(self):
        cfg = fm.SimConfig(
            market=MK_NORMAL,
            mechanism=fm.MechanismSpec(fm.Rule.EIP1559, d=0.125),
            b0=170.0,
            n_skip=200,
        )
        avgs = fm.run_average(cfg, long_n=100_000)
        b_star = fm.market_clearing_price(MK_NORMAL)
        assert avgs.avg_base_fee < b_star

    def test_requires_room_after_burn_in(self):
        cfg = fm.SimConfig(
            market=MK_NORMAL,
            mechanism=fm.MechanismSpec(fm.Rule.EIP1559),
            n_skip=200,
        )
        with pytest.raises(DomainError):
            fm.run_average(cfg, long_n=200)
