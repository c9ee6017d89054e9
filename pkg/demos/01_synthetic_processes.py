"""Generate the built-in synthetic processes and check their moments.

Each generator is deterministic given a seed.  The moving-average and
autoregressive processes have closed-form variances and autocorrelations,
so the empirical values printed here can be compared directly.
"""
import numpy as np

from tsnovelty import datagen


def acf(x, lag):
    c = x - x.mean()
    return float(np.dot(c[:-lag], c[lag:]) / np.dot(c, c))


def main():
    n = 200_000

    ma = datagen.gen_ma(n, seed=0, theta=2.5)
    print("MA(1), theta=2.5, innovations U[-1,1]")
    print(f"  var  {ma.var():.4f}   (closed form {7.25 / 3:.4f})")
    print(f"  acf1 {acf(ma, 1):.4f}   (closed form {2.5 / 7.25:.4f})")
    print(f"  acf2 {acf(ma, 2):+.4f}   (closed form 0)")

    lar = datagen.gen_lar(n, phi=0.5, seed=1)
    print("\nAR(1), phi=0.5, innovations U[-1,1]")
    print(f"  var  {lar.var():.4f}   (closed form {(1 / 3) / 0.75:.4f})")
    print(f"  acf1 {acf(lar, 1):.4f}   (closed form 0.5)")

    p = np.array([[0.6, 0.4], [0.4, 0.6]])
    mc = datagen.gen_mc(n, p, seed=2)
    stay0 = float(np.mean(mc[1:][mc[:-1] == 0] == 0))
    print("\nTwo-state Markov chain, stay probability 0.6")
    print(f"  occupancy of state 1: {mc.mean():.4f}   (stationary 0.5)")
    print(f"  observed P(0 -> 0):   {stay0:.4f}   (target 0.6)")

    noisy = datagen.inject_gmm_noise(lar[:1000], seed=3)
    print("\nGaussian-mixture noise injection on the AR series")
    print(f"  clean var {lar[:1000].var():.4f} -> noisy var {noisy.var():.4f}")


if __name__ == "__main__":
    main()
