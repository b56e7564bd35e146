"""Configurations, projectors, coordinate maps, stabilizers, samplers."""

import numpy as np
import pytest

from spherekern import (
    DomainError,
    RankError,
    SingularityError,
    SphereConfig,
    inner_z,
    map_t1,
    map_t2,
    projectors,
    random_config,
    sample_orthogonal,
    sample_sphere,
    stabilizer_element,
)

E1_3 = np.eye(3)[:, :1]


class TestConfig:
    def test_unit_column_enforced(self):
        with pytest.raises(DomainError):
            SphereConfig(np.array([[1.0], [1.0], [0.0]]))

    def test_rank_flag(self):
        cfg = SphereConfig(np.column_stack([np.eye(2)[:, 0], np.eye(2)[:, 0]]))
        assert not cfg.full_rank
        with pytest.raises(RankError):
            projectors(cfg)

    def test_empty_configuration(self):
        cfg = SphereConfig(np.zeros((4, 0)))
        assert cfg.full_rank
        pp = cfg.proj
        assert np.allclose(pp.Pi, 0)
        assert np.allclose(pp.PiPerp, np.eye(4))
        x = np.array([0.0, 1.0, 0.0, 0.0])
        assert inner_z(cfg, x, x) == pytest.approx(1.0)

    def test_extend(self):
        cfg = SphereConfig(E1_3)
        ext = cfg.extend(np.array([0.0, 1.0, 0.0]))
        assert ext.r == 2
        assert ext.full_rank


class TestProjectors:
    def test_axis_examples(self):
        pp = projectors(SphereConfig(E1_3))
        assert np.allclose(pp.Pi, np.diag([1.0, 0.0, 0.0]), atol=1e-14)
        assert np.allclose(pp.PiPerp, np.diag([0.0, 1.0, 1.0]), atol=1e-14)
        pp2 = projectors(SphereConfig(np.eye(3)[:, :2]))
        assert np.allclose(pp2.Pi, np.diag([1.0, 1.0, 0.0]), atol=1e-14)

    def test_invariants_random(self):
        rng = np.random.default_rng(0)
        count = 0
        while count < 1000:
            n = int(rng.integers(3, 9))
            r = int(rng.integers(1, n - 1))
            cfg = random_config(n, r, rng)
            pp = cfg.proj
            eye = np.eye(n)
            assert np.max(np.abs(pp.Pi @ pp.Pi - pp.Pi)) < 1e-10
            assert np.max(np.abs(pp.PiPerp @ pp.PiPerp - pp.PiPerp)) < 1e-10
            assert np.max(np.abs(pp.Pi + pp.PiPerp - eye)) < 1e-10
            assert np.max(np.abs(pp.Pi @ cfg.Z - cfg.Z)) < 1e-10
            assert np.max(np.abs(pp.ort.T @ pp.ort - np.eye(n - r))) < 1e-10
            assert np.max(np.abs(pp.Pi @ pp.ort)) < 1e-10
            count += 1

    def test_phi_isometry(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            n = int(rng.integers(3, 9))
            r = int(rng.integers(1, n - 1))
            cfg = random_config(n, r, rng)
            pp = cfg.proj
            a1 = pp.PiPerp @ rng.standard_normal(n)
            a2 = pp.PiPerp @ rng.standard_normal(n)
            lhs = (pp.ort.T @ a1) @ (pp.ort.T @ a2)
            assert abs(lhs - a1 @ a2) < 1e-10


class TestInnerZ:
    def test_trivial_values(self):
        cfg = SphereConfig(E1_3)
        y = np.array([0.0, 1.0, 0.0])
        assert inner_z(cfg, y, y) == pytest.approx(1.0, abs=1e-14)
        e1 = np.array([1.0, 0.0, 0.0])
        assert inner_z(cfg, e1, y) == pytest.approx(0.0, abs=1e-14)
        assert inner_z(cfg, e1, e1) == pytest.approx(0.0, abs=1e-14)

    def test_schur_matches_projector_form(self):
        rng = np.random.default_rng(1)
        for _ in range(1000):
            n = int(rng.integers(3, 8))
            r = int(rng.integers(1, n - 1))
            cfg = random_config(n, r, rng)
            x, y = sample_sphere(n, 2, rng)
            pp = cfg.proj
            want = (pp.PiPerp @ x) @ (pp.PiPerp @ y)
            assert abs(inner_z(cfg, x, y) - want) < 1e-12

    def test_rank_error(self):
        cfg = SphereConfig(np.column_stack([np.eye(3)[:, 0], np.eye(3)[:, 0]]))
        with pytest.raises(RankError):
            inner_z(cfg, np.eye(3)[:, 1], np.eye(3)[:, 1])


class TestCoordinateMaps:
    def test_t1_examples(self):
        cfg = SphereConfig(E1_3)
        x = map_t1(cfg, np.array([0.0, 1.0]), np.array([0.0]))
        assert np.allclose(x, [0.0, 0.0, 1.0], atol=1e-14)
        x2 = map_t1(cfg, np.array([1.0, 0.0]), np.array([1.0]))
        assert np.allclose(x2, [1.0, 0.0, 0.0], atol=1e-14)

    def test_t1_outputs_unit(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            n = int(rng.integers(3, 8))
            r = int(rng.integers(1, n - 1))
            cfg = random_config(n, r, rng)
            v = sample_sphere(n - r, 1, rng)[0]
            x0 = sample_sphere(n, 1, rng)[0]
            u = cfg.Z.T @ x0
            x = map_t1(cfg, v, u)
            assert abs(np.linalg.norm(x) - 1.0) < 1e-10

    def test_t1_domain_error(self):
        cfg = SphereConfig(E1_3)
        with pytest.raises(DomainError):
            map_t1(cfg, np.array([1.0, 0.0]), np.array([1.5]))
        with pytest.raises(DomainError):
            map_t1(cfg, np.array([2.0, 0.0]), np.array([0.0]))

    def test_t2_examples(self):
        cfg = SphereConfig(E1_3)
        v, u = map_t2(cfg, np.array([0.0, 0.0, 1.0]))
        assert np.allclose(v, [0.0, 1.0], atol=1e-14)
        assert np.allclose(u, [0.0], atol=1e-14)
        with pytest.raises(SingularityError):
            map_t2(cfg, np.array([1.0, 0.0, 0.0]))

    def test_t2_spec_point(self):
        cfg = SphereConfig(np.eye(4)[:, :2])
        v, u = map_t2(cfg, np.array([0.6, 0.0, 0.8, 0.0]))
        assert np.allclose(u, [0.6, 0.0], atol=1e-14)
        assert np.allclose(v, [1.0, 0.0], atol=1e-14)

    def test_t1_t2_identity(self):
        rng = np.random.default_rng(3)
        for n, r in [(4, 1), (5, 2), (8, 3)]:
            for _ in range(100):
                cfg = random_config(n, r, rng)
                x = sample_sphere(n, 1, rng)[0]
                if np.linalg.norm(cfg.proj.PiPerp @ x) <= 1e-6:
                    continue
                v, u = map_t2(cfg, x)
                assert np.linalg.norm(map_t1(cfg, v, u) - x) < 1e-12

    def test_t2_injectivity(self):
        rng = np.random.default_rng(4)
        for _ in range(300):
            n = int(rng.integers(4, 8))
            r = int(rng.integers(1, n - 2))
            cfg = random_config(n, r, rng)
            x1, x2 = sample_sphere(n, 2, rng)
            if np.linalg.norm(x1 - x2) <= 1e-6:
                continue
            if min(np.linalg.norm(cfg.proj.PiPerp @ x1), np.linalg.norm(cfg.proj.PiPerp @ x2)) <= 1e-6:
                continue
            v1, u1 = map_t2(cfg, x1)
            v2, u2 = map_t2(cfg, x2)
            dist = np.linalg.norm(np.concatenate([v1 - v2, u1 - u2]))
            assert dist > 1e-9


class TestStabilizer:
    def test_identity(self):
        cfg = SphereConfig(E1_3)
        assert np.allclose(stabilizer_element(cfg, np.eye(2)), np.eye(3), atol=1e-14)

    def test_block_rotation(self):
        cfg = SphereConfig(E1_3)
        Q = np.array([[0.0, -1.0], [1.0, 0.0]])
        M = stabilizer_element(cfg, Q)
        want = np.zeros((3, 3))
        want[0, 0] = 1.0
        want[1:, 1:] = Q
        assert np.allclose(M, want, atol=1e-12)

    def test_random_properties(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            n = int(rng.integers(3, 8))
            r = int(rng.integers(1, n - 1))
            cfg = random_config(n, r, rng)
            M = stabilizer_element(cfg, sample_orthogonal(n - r, rng))
            assert np.max(np.abs(M @ cfg.Z - cfg.Z)) < 1e-10
            assert np.max(np.abs(M.T @ M - np.eye(n))) < 1e-10

    def test_rejects_non_orthogonal(self):
        cfg = SphereConfig(E1_3)
        with pytest.raises(DomainError):
            stabilizer_element(cfg, np.array([[1.0, 0.5], [0.0, 1.0]]))


class TestSamplers:
    def test_sphere_unit_and_deterministic(self):
        pts = sample_sphere(5, 50, seed=9)
        assert np.max(np.abs(np.linalg.norm(pts, axis=1) - 1.0)) < 1e-12
        assert np.array_equal(pts, sample_sphere(5, 50, seed=9))

    def test_sphere_mean_clt(self):
        pts = sample_sphere(3, 100000, seed=0)
        assert np.linalg.norm(pts.mean(axis=0)) < 0.02

    def test_orthogonal_properties(self):
        M = sample_orthogonal(6, seed=1)
        assert np.max(np.abs(M.T @ M - np.eye(6))) < 1e-10
        assert abs(abs(np.linalg.det(M)) - 1.0) < 1e-10

    def test_orthogonal_column_mean_clt(self):
        rng = np.random.default_rng(2)
        acc = np.zeros((4, 4))
        for _ in range(10000):
            acc += sample_orthogonal(4, rng)
        assert np.linalg.norm(acc / 10000) < 0.05

    def test_random_config_full_rank(self):
        for seed in range(20):
            cfg = random_config(6, 3, seed=seed)
            assert cfg.full_rank
            assert np.linalg.svd(cfg.Z, compute_uv=False)[-1] > 1e-3

    def test_too_many_columns(self):
        with pytest.raises(DomainError):
            random_config(3, 4)
