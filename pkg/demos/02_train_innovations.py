"""Train the innovations auto-encoder on an AR(1) series.

The encoder maps sliding windows to a scalar sequence in (-1, 1) that
should look i.i.d. when training succeeds.  Training stops as soon as the
innovations of a held-out series pass the runs up-and-down test, which
takes a few hundred to ~1500 epochs (a couple of minutes).
"""
import numpy as np

from tsnovelty import datagen, stats
from tsnovelty.autoencoder import TrainConfig, train


def describe(tag, nu):
    lag1 = float(np.corrcoef(nu[:-1], nu[1:])[0, 1])
    p = stats.runs_up_down_test(nu).p_value
    print(f"  {tag:<10} lag-1 acf {lag1:+.3f}   runs-test p {p:.3g}")


def main():
    series = datagen.gen_lar(10_000, phi=0.5, seed=18)
    held_out = datagen.gen_lar(2_000, phi=0.5, seed=99)
    print("training on 10,000 samples of AR(1), phi=0.5")

    config = TrainConfig(lambda1=1.0, lambda2=1.6, mu=1.0,
                         n_critic=1, epochs=1500, seed=18)
    untrained = train(series, TrainConfig(**{**config.__dict__, "epochs": 0}))

    def white_enough(model, epoch):
        if epoch + 1 < 100 or (epoch + 1) % 25:
            return False
        ok = stats.runs_up_down_test(model.encode(held_out)).p_value > 0.05
        if ok:
            print(f"  held-out runs test passed at epoch {epoch + 1}")
        return ok

    model = train(series, config, callback=white_enough)

    print("\nencoded innovations on held-out data:")
    describe("untrained", untrained.encode(held_out))
    describe("trained", model.encode(held_out))

    recon = model.reconstruct(held_out)
    tail = held_out[held_out.size - recon.size:]
    print(f"\nreconstruction of the last {recon.size} samples:")
    print(f"  original std {tail.std():.3f}, reconstructed std {recon.std():.3f}")
    print(f"  mean abs error {np.mean(np.abs(recon - tail)):.3f}")


if __name__ == "__main__":
    main()
