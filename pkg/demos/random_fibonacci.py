"""Growth rate of x_{n+1} = x_n +- x_{n-1} with random signs.

Two estimators are compared: the telescopic norm growth of the matrix
product and the ergodic average of log|x + sign/x| along the Riccati orbit.
The deterministic Fibonacci chain is shown for scale.
"""
import math

from disorder_rmt.ensembles import Fibonacci, RandomFibonacci, finite_support
from disorder_rmt.lyapunov import gamma_furstenberg, gamma_norm_growth, strong_irreducibility

VISWANATH = 0.1239755988

for n in (10**4, 10**5, 10**6, 10**7):
    est = gamma_norm_growth(RandomFibonacci(), n, rng=1)
    print(f"n={n:>9d}  gamma={est.value:.7f} +- {est.stderr:.1e}  (target {VISWANATH})")

fur = gamma_furstenberg(RandomFibonacci(), 1000, 10**6, rng=2)
print(f"Furstenberg average: {fur.value:.6f} +- {fur.stderr:.1e}")

print("Fibonacci:", gamma_norm_growth(Fibonacci(), 10**5, rng=3).value, "ln(phi) =", math.log((1 + 5**0.5) / 2))
print("strong irreducibility:", strong_irreducibility(finite_support(RandomFibonacci())).tag)
