"""Online novelty detection on a stream that changes distribution midway.

A model is trained on AR(1) normal data, then scores a stream whose second
half switches to an AR(2) process with (almost) the same marginal law.
Each disjoint block of encoded innovations gets a goodness-of-fit
statistic; large values flag departure from the normal regime.

Block testing needs a well-calibrated innovations marginal, so this demo
trains longer than demo 02 (a few minutes): a long run at the standard
rate followed by a low-rate stretch that damps the adversarial cycling.
Even then the marginal keeps a small systematic imperfection that inflates
every block statistic, so the nominal chi-square p-values under-cover on
normal data.  The practical fix, shown here, is to calibrate the decision
threshold empirically: score a held-out normal stream and flag test blocks
whose statistic exceeds its 95th percentile.
"""
import numpy as np

from tsnovelty import datagen
from tsnovelty.autoencoder import TrainConfig, train
from tsnovelty.detect import DetectConfig, score_stream


def main():
    normal = datagen.gen_lar(10_000, phi=0.5, seed=18, law="N(0,1)")
    config = TrainConfig(lambda1=1.0, lambda2=1.6, mu=1.0,
                         n_critic=1, epochs=3_000, seed=20,
                         penalty_batch=12, lr_decay_epoch=1_500,
                         lr_decayed=3e-5)
    print("training on AR(1) phi=0.5 normal data...")
    model = train(normal, config)
    cfg = DetectConfig(block_len=1_000)

    validation = datagen.gen_lar(20_000, phi=0.5, seed=9, law="N(0,1)")
    val_stats = [s.statistic for s in score_stream(model, validation, cfg)]
    threshold = float(np.quantile(val_stats, 0.95))
    print(f"validation blocks: statistic median {np.median(val_stats):.1f}, "
          f"95th percentile {threshold:.1f} (novelty threshold)")

    stream = np.concatenate([
        datagen.gen_lar(5_000, phi=0.5, seed=7, law="N(0,1)"),
        datagen.gen_lar(5_000, phi=[0.3, 0.3], seed=8, law="N(0,1)"),
    ])
    scores = score_stream(model, stream, cfg)

    print("\nblock  series-start  statistic   nominal-p   decision")
    for s in scores:
        regime = "ar1" if s.start + 1_000 <= 5_000 else "ar2"
        flag = "novel" if s.statistic > threshold else "normal"
        print(f"{s.block_index:>5}  {s.start:>12}  {s.statistic:>9.2f}"
              f"   {s.p_value:<9.3g}  {flag:<7} [{regime}]")


if __name__ == "__main__":
    main()
