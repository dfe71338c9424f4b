"""
Test script for Schmidt-number certification.

Tests:
1. Fidelity bound
2. Sampling S_k (rank-k pure states, mixtures, isotropic states)
3. End-to-end certification reports
4. Soundness on states of known Schmidt number
5. Distance bounds (witness lower bound, sampled upper bound)
6. Isotropic sweeps

Run from project root: python api/tests/test_certify.py
Or use pytest: pytest api/tests/test_certify.py
"""

import sys
import tempfile
import traceback
from pathlib import Path

import numpy as np

# Add project root to path for imports
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from api.models.report_models import CertificationStrategy
from api.services import certify, frames, matcore, witness
from api.services.errors import (
    DimensionMismatch,
    FramesUnavailable,
    ParameterOutOfRange,
    StateValidationError,
)
from api.services.frame_store import FrameStore
from api.tests import frame_fixtures


def _strategy(*frame_list, **kwargs):
    return CertificationStrategy(frames=list(frame_list), **kwargs)


def test_fidelity_bound():
    """F = Tr(ρΦ_norm) and the SN bound ⌈dF⌉."""
    print("=" * 60)
    print("Testing Fidelity Bound")
    print("=" * 60)

    for d in (2, 3, 4):
        fidelity, sn_lower = certify.fidelity_bound(matcore.maximally_entangled_projector(d))
        assert abs(fidelity - 1) < 1e-12 and sn_lower == d
        fidelity, sn_lower = certify.fidelity_bound(np.eye(d * d) / d ** 2)
        assert abs(fidelity - 1 / d ** 2) < 1e-12 and sn_lower == 1
    print("✓ Φ → (1, d); I/d² → (1/d², 1)")

    fidelity, sn_lower = certify.fidelity_bound(certify.isotropic_state(3, 0.7))
    assert abs(fidelity - (0.7 + 0.3 / 9)) < 1e-12 and sn_lower == 3
    print(f"✓ Isotropic p=0.7: F = {fidelity:.6f}, SN ≥ {sn_lower}")

    # F = 1/3 exactly sits on the k=1 boundary and does not certify
    boundary = certify.isotropic_state(3, 0.25)
    fidelity, sn_lower = certify.fidelity_bound(boundary)
    assert abs(fidelity - 1 / 3) < 1e-12 and sn_lower == 1
    assert not certify.fidelity_certifies(fidelity, 3, 1)
    print("✓ Boundary fidelity k/d does not certify")

    try:
        certify.fidelity_bound(np.eye(5))
        raise AssertionError("expected DimensionMismatch")
    except DimensionMismatch:
        print("✓ Non-square side rejected")


def test_sampling():
    """Rank-k pure states, S_k mixtures and isotropic states."""
    print("=" * 60)
    print("Testing S_k Sampling")
    print("=" * 60)

    for d in (2, 3, 4):
        for k in range(1, d + 1):
            for seed in range(10):
                psi = certify.random_rank_k_pure(d, k, seed)
                assert abs(np.linalg.norm(psi) - 1) < 1e-12
                assert matcore.schmidt_rank(psi, d, d) <= k
    print("✓ Random rank-k pure states have Schmidt rank <= k")

    psi = certify.random_rank_k_pure(3, 1, 5)
    coefficients = matcore.schmidt_coefficients(psi, 3, 3)
    assert abs(coefficients[0] - 1) < 1e-12 and np.all(coefficients[1:] < 1e-10)
    print("✓ k=1 gives a product state")

    psi = certify.random_rank_k_pure(3, 3, 8, uniform=True)
    assert np.allclose(matcore.schmidt_coefficients(psi, 3, 3), 1 / np.sqrt(3))
    assert abs(certify.fidelity_bound(matcore.projector(psi))[0]) <= 1 + 1e-12
    print("✓ Uniform k=d gives a local-unitary rotation of Φ")

    try:
        certify.random_rank_k_pure(3, 4, 0)
        raise AssertionError("expected ParameterOutOfRange")
    except ParameterOutOfRange:
        print("✓ k > d rejected")

    sample = certify.sample_sk_state(3, 2, seed=4)
    assert sample.components.shape == (6, 9)
    assert np.all(sample.weights >= 0) and abs(sample.weights.sum() - 1) < 1e-12
    matcore.validate_density(sample.rho, dim=9)
    for component in sample.components:
        assert matcore.schmidt_rank(component, 3, 3) <= 2
    print("✓ Mixture of 2d components is a valid density in S_k")

    single = certify.sample_sk_state(3, 1, components=1, seed=2)
    assert abs(np.real(np.trace(single.rho @ single.rho)) - 1) < 1e-12
    print("✓ One k=1 component gives a pure product state")

    first = certify.sample_sk_state(2, 2, components=3, seed=9, weights=[1.0, 0.0, 0.0])
    assert np.allclose(first.rho, matcore.projector(first.components[0]))
    print("✓ Weights (1, 0, 0) select the first component")

    for bad in ({'components': 0}, {'components': 2, 'weights': [0.7, 0.7]}):
        try:
            certify.sample_sk_state(2, 1, **bad)
            raise AssertionError(f"expected ParameterOutOfRange for {bad}")
        except ParameterOutOfRange:
            pass
    print("✓ Bad component counts and weights rejected")

    assert np.allclose(certify.isotropic_state(3, 1.0), matcore.maximally_entangled_projector(3))
    assert np.allclose(certify.isotropic_state(3, 0.0), np.eye(9) / 9)
    assert matcore.is_psd(certify.isotropic_state(3, -1 / 8))
    for p in (-0.2, 1.1):
        try:
            certify.isotropic_state(3, p)
            raise AssertionError(f"expected ParameterOutOfRange for p={p}")
        except ParameterOutOfRange:
            pass
    print("✓ Isotropic states over [-1/(d²-1), 1]")


def test_certification_reports():
    """Reports for Φ, I/d² and an isotropic state only the fidelity test catches."""
    print("=" * 60)
    print("Testing Certification Reports")
    print("=" * 60)

    mubs = frames.mub_prime(3)
    sic = frame_fixtures.sic(3)

    report = certify.certify_schmidt_number(
        matcore.maximally_entangled_projector(3), strategy=_strategy(mubs, sic)
    )
    assert report.final_bound == 3 and report.verdict == "SN ≥ 3"
    assert report.max_k == 2 and abs(report.fidelity - 1) < 1e-12
    k2_mub = [e for e in report.evidence if e.k == 2 and e.method == 'mub-witness']
    assert len(k2_mub) == 1 and abs(k2_mub[0].value + 0.153531) < 1e-6 and k2_mub[0].certified
    k2_sic = [e for e in report.evidence if e.k == 2 and e.method == 'sic-witness']
    assert k2_sic[0].certified
    assert all(e.certified for e in report.evidence)
    print(f"✓ Φ d=3: {report.verdict}, {len(report.evidence)} evidence cells all certify")

    methods = [(e.k, e.method) for e in report.evidence]
    order = ['fidelity', 'sic-witness', 'mub-witness', 'kmap-spectrum']
    assert methods == sorted(methods, key=lambda m: (m[0], order.index(m[1])))
    print("✓ Evidence ordered by (k, method)")

    report = certify.certify_schmidt_number(np.eye(9) / 9, strategy=_strategy(mubs))
    assert report.final_bound == 1 and report.verdict == "SN ≥ 1"
    assert not any(e.certified for e in report.evidence)
    assert all(e.verdict == "inconclusive" for e in report.evidence)
    print("✓ I/9: everything inconclusive, SN ≥ 1")

    rho = certify.isotropic_state(3, 0.65)
    report = certify.certify_schmidt_number(rho, strategy=_strategy(mubs))
    cells = {(e.k, e.method): e for e in report.evidence}
    assert abs(report.fidelity - (0.65 + 0.35 / 9)) < 1e-12
    assert cells[(2, 'fidelity')].certified
    assert abs(cells[(2, 'mub-witness')].value - 0.0168714) < 1e-6
    assert not cells[(2, 'mub-witness')].certified
    assert report.final_bound == 3
    print(f"✓ Isotropic p=0.65: fidelity certifies, MUB witness inconclusive "
          f"({cells[(2, 'mub-witness')].value:+.6f})")

    try:
        certify.certify_schmidt_number(0.9 * np.eye(9) / 9, strategy=_strategy(mubs))
        raise AssertionError("expected StateValidationError")
    except StateValidationError as e:
        assert e.invariant == 'trace'
        print("✓ Trace-0.9 input rejected with 'trace'")

    try:
        certify.certify_schmidt_number(np.eye(9) / 9, max_k=3, strategy=_strategy(mubs))
        raise AssertionError("expected ParameterOutOfRange")
    except ParameterOutOfRange:
        print("✓ max_k >= d rejected")

    try:
        certify.certify_schmidt_number(np.eye(16) / 16, strategy=_strategy(mubs))
        raise AssertionError("expected DimensionMismatch")
    except DimensionMismatch:
        print("✓ Frame dimension must match the state")

    try:
        certify.certify_schmidt_number(
            np.eye(36) / 36, strategy=CertificationStrategy(auto_frames=False)
        )
        raise AssertionError("expected FramesUnavailable")
    except FramesUnavailable:
        print("✓ No frames and no provisioning → FramesUnavailable")

    with tempfile.TemporaryDirectory() as tmp:
        store = FrameStore(cache_dir=Path(tmp), sic_restarts=16)
        report = certify.certify_schmidt_number(
            matcore.maximally_entangled_projector(2), store=store
        )
        assert report.final_bound == 2 and report.frames[0].startswith("mub:")

        report = certify.certify_schmidt_number(
            matcore.maximally_entangled_projector(3), store=store
        )
        methods = {cell.method for cell in report.evidence}
        assert {'sic-witness', 'mub-witness'} <= methods, methods
        assert [entry.split(":")[0] for entry in report.frames] == ['mub', 'sic']
        assert report.final_bound == 3
        print("✓ Automatic frames for d=3: MUB and SIC witnesses both reported")

        try:
            certify.certify_schmidt_number(np.eye(81) / 81, store=store)
            raise AssertionError("expected FramesUnavailable")
        except FramesUnavailable:
            print("✓ Automatic frames: MUBs for d=2, nothing for d=9")


def test_determinism():
    """Same strategy, same report."""
    print("=" * 60)
    print("Testing Determinism")
    print("=" * 60)

    rho = matcore.random_density(9, 21)
    strategy = CertificationStrategy.with_seed_count(3, frames=[frames.mub_prime(3)], upper_samples=50)
    first = certify.certify_schmidt_number(rho, strategy=strategy)
    second = certify.certify_schmidt_number(rho, strategy=strategy)
    assert first.model_dump_json() == second.model_dump_json()
    assert first.rotation_seeds == [0, 1, 2, 3]
    assert all(b.upper is not None and b.lower <= b.upper + 1e-9 for b in first.distance_bounds)
    print("✓ Byte-identical reports for identical strategies")


def test_soundness():
    """No certification ever exceeds the Schmidt number of a constructed S_k state."""
    print("=" * 60)
    print("Testing Soundness on S_k Samples")
    print("=" * 60)

    for d in (2, 3, 4):
        strategy = CertificationStrategy.with_seed_count(
            2, frames=[frame_fixtures.sic(d), frame_fixtures.mubs(d)]
        )
        checked = 0
        for k in range(1, d):
            for seed in range(250):
                sample = certify.sample_sk_state(d, k, seed=seed + 1000 * k)
                report = certify.certify_schmidt_number(sample.rho, strategy=strategy)
                assert report.final_bound <= k, (d, k, seed, report.verdict)
                checked += 1
        print(f"✓ d={d}: {checked} S_k samples, no bound above k")


def test_distance_bounds():
    """Witness lower bounds, sampled upper bounds and their sandwich."""
    print("=" * 60)
    print("Testing Distance Bounds")
    print("=" * 60)

    mubs = frames.mub_prime(3)
    phi = matcore.maximally_entangled_projector(3)
    lower_k2 = certify.distance_lower_bound(phi, witness.mub_witness(3, 2, mubs))
    lower_k1 = certify.distance_lower_bound(phi, witness.mub_witness(3, 1, mubs))
    assert abs(lower_k2 - 0.297311) < 1e-6
    assert abs(lower_k1 - 0.707107) < 1e-6
    print(f"✓ Φ d=3: lower bounds {lower_k1:.6f} (k=1), {lower_k2:.6f} (k=2)")

    sigma = certify.sample_sk_state(3, 2, seed=3).rho
    assert certify.distance_lower_bound(sigma, witness.mub_witness(3, 2, mubs)) < 1e-12
    print("✓ Bound clamps to 0 on S_k members")

    try:
        certify.distance_lower_bound(phi, witness.sic_witness(3, 2, frame_fixtures.sic(3)))
        raise AssertionError("expected ParameterOutOfRange")
    except ParameterOutOfRange:
        print("✓ Lower bound uses MUB witnesses")

    phi2 = matcore.maximally_entangled_projector(2)
    lower = certify.distance_lower_bound(phi2, witness.mub_witness(2, 1, frames.mub_prime(2)))
    upper = certify.distance_upper_bound_sampler(phi2, 2, 1, samples=2000)
    assert abs(lower - 1 / np.sqrt(3)) < 1e-9
    assert lower <= upper + 1e-9
    print(f"✓ Φ d=2 k=1: {lower:.6f} <= {upper:.6f}")

    upper = certify.distance_upper_bound_sampler(phi, 3, 2, samples=500)
    assert upper >= 0.297311 - 1e-9
    print(f"✓ Φ d=3 k=2: upper {upper:.6f} >= 0.297311")

    assert certify.distance_upper_bound_sampler(sigma, 3, 2, samples=1, candidates=[sigma]) == 0.0
    print("✓ Candidates in S_k bring the upper bound to 0")

    rho = matcore.random_density(9, 5)
    previous = np.inf
    for samples in (1, 10, 100):
        value = certify.distance_upper_bound_sampler(rho, 3, 1, samples=samples, seed=7)
        assert value <= previous
        previous = value
    print("✓ Upper bound nonincreasing in the number of samples")

    for d in (2, 3):
        frame = frame_fixtures.mubs(d)
        for seed in range(5):
            rho = matcore.random_density(d * d, 300 + seed, rank=1)
            for k in range(1, d):
                lower = certify.distance_lower_bound(rho, witness.seeded_witness(frame, k, seed))
                upper = certify.distance_upper_bound_sampler(rho, d, k, samples=100, seed=seed)
                assert lower <= upper + 1e-9
    print("✓ Sandwich lower <= upper on random pure states")

    try:
        certify.distance_upper_bound_sampler(phi, 3, 1, samples=0)
        raise AssertionError("expected ParameterOutOfRange")
    except ParameterOutOfRange:
        print("✓ samples < 1 rejected")


def test_isotropic_sweep():
    """Witness verdict flips between p = 0.68 and 0.69; p = 1 gives -0.153531."""
    print("=" * 60)
    print("Testing Isotropic Sweep")
    print("=" * 60)

    grid = [0.6, 0.65, 0.68, 0.69, 0.7, 0.75, 1.0]
    rows = certify.isotropic_sweep(3, 2, grid, frames.mub_prime(3))
    by_p = {row.p: row for row in rows}
    assert [row.p for row in rows] == grid
    assert by_p[0.68].witness_verdict == "inconclusive"
    assert by_p[0.69].witness_verdict == "SN ≥ 3"
    assert abs(by_p[1.0].witness_value + 0.153531) < 1e-6
    assert abs(by_p[1.0].distance_lower_bound - 0.297311) < 1e-6
    assert abs(by_p[0.65].fidelity - 0.688889) < 1e-6
    assert by_p[0.65].fidelity_verdict == "SN ≥ 3" and by_p[0.6].fidelity_verdict == "inconclusive"
    print("✓ Verdicts and values along the grid")

    seeded = certify.isotropic_sweep(3, 2, [1.0], frames.mub_prime(3), seeds=[0, 1, 2])
    assert seeded[0].witness_value <= by_p[1.0].witness_value
    print("✓ Extra rotation seeds never weaken the witness value")

    for bad in ((3, 3, [0.5]), (3, 2, [1.5])):
        try:
            certify.isotropic_sweep(bad[0], bad[1], bad[2], frames.mub_prime(3))
            raise AssertionError(f"expected ParameterOutOfRange for {bad}")
        except ParameterOutOfRange:
            pass
    print("✓ Bad order and grid point rejected")


def main():
    """Run all certification tests."""
    print("\n" + "=" * 60)
    print("CERTIFICATION TEST SUITE")
    print("=" * 60 + "\n")

    tests = {
        "Fidelity": test_fidelity_bound,
        "Sampling": test_sampling,
        "Reports": test_certification_reports,
        "Determinism": test_determinism,
        "Soundness": test_soundness,
        "Distance Bounds": test_distance_bounds,
        "Sweep": test_isotropic_sweep,
    }
    results = {}
    for name, test in tests.items():
        try:
            test()
            results[name] = True
        except Exception as e:
            print(f"✗ {name} failed: {e}")
            traceback.print_exc()
            results[name] = False

    print("\n" + "=" * 60)
    print("Test Summary")
    print("=" * 60)
    for name, ok in results.items():
        print(f"  {name + ':':20} {'✓ PASS' if ok else '✗ FAIL'}")
    return all(results.values())


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
