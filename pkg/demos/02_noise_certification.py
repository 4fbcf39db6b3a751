"""Checking that a noise generator satisfies the noise assumptions.

Two empirical checks are run on long sample paths: the moment generating
function must stay below exp(s^2 delta^2 / 2), and the sequence must look
like a martingale difference (no predictable part from its own past).
Run: python demos/02_noise_certification.py
"""

from lstail.noise import NoiseSpec, check_mds, check_subgaussian, default_s_grid, sample_noise

N = 100_000

cases = [
    ("gaussian(1)", NoiseSpec.gaussian(1.0), None),
    ("impulsive mixture", NoiseSpec.gaussian_mixture([0.9, 0.1], [0.5, 4.0]), None),
    ("BPSK interference", NoiseSpec.fir_mds(3, 2.0, 1.0, 2.0), None),
    ("gaussian(1), delta claimed 0.5", NoiseSpec.gaussian(1.0), 0.5),
    ("AR(1), phi = 0.8", NoiseSpec.ar1(0.8, 1.0), None),
]
# AR(1) uses its marginal sd as delta. Its MGF check can still fail, because
# the slack assumes independent draws and strong correlation widens the real error.

for label, spec, claimed in cases:
    delta = spec.delta if claimed is None else claimed
    v = sample_noise(spec, N, seed=1).values
    sub = check_subgaussian(v, delta, default_s_grid(delta))
    mds = check_mds(v, max_lag=5)
    print(f"{label:32s} delta={delta:6.3f}  subgaussian={'ok' if sub.passed else 'FAIL':4s}"
          f"  mds={'ok' if mds.passed else 'FAIL':4s}  max |z|={mds.max_stat:6.2f} (crit {mds.critical:.2f})")

# The interference model mixes past BPSK symbols through fresh random taps,
# so it is dependent on its past yet has no linear predictability.
v = sample_noise(NoiseSpec.fir_mds(3, 2.0, 1.0, 2.0), N, seed=2).values
print("\nfir lag autocorrelations:", check_mds(v, 3).autocorr.round(4))
