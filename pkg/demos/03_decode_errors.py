"""Maximum-likelihood decoding error rates at desk scale.

Two experiments over the memoryless queue at the rate-optimal load:

  1. fixed message count, growing block length: errors collapse fast,
  2. fixed block length, growing message count: errors climb.

Block lengths are kept tiny on purpose. At n around 50 the error rate of a
16-message code is already far below anything 600 trials could resolve, so
the interesting regime for a quick look is n of a few packets.
"""

from timingq import decode_rate_experiment, maximize_rate, rate_R

lam = maximize_rate(1.0, bracket=(0.4, 0.5), tol=1e-6).rho_star
peak = rate_R(lam, 1.0)

print(f"arrival rate lam = {lam:.4f}, achievable rate {peak:.4f} nats/time\n")

print("fixed M=16, growing n (seed 20250, 300 trials per row):")
rows = decode_rate_experiment([16], lam, 1.0, [2, 5, 10], trials=300,
                              seed=20250, threads=4)
for row in rows:
    print(f"  n={row['n']:>3}  errors {row['errors']:>3}/300  "
          f"error rate {row['error_rate']:.3f}  "
          f"operating rate {row['operating_rate']:.4f} "
          f"({100 * row['operating_rate'] / peak:.0f}% of peak)")

print("\nfixed n=8, growing M:")
rows = decode_rate_experiment([4, 64, 1024], lam, 1.0, [8], trials=300,
                              seed=20251, threads=4)
for row in rows:
    print(f"  M={row['M']:>5}  errors {row['errors']:>3}/300  "
          f"error rate {row['error_rate']:.3f}  "
          f"operating rate {row['operating_rate']:.4f}")
