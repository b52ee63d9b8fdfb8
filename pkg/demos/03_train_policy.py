"""Train the zonal dispatch policy at demo scale and watch it improve.

Uses a reduced instance budget so the demo finishes in about a minute; the
full desk-scale budget (1200 instances) is what the tests and the CLI
default to.
"""

import numpy as np

from sodfeeder import Scenario, train_rl

sc = Scenario()
trainer, stats = train_rl(sc, n_instances=160, out_checkpoint="demo_policy.npz",
                          stats_path="demo_training_stats.csv", seed=0)

rewards = [row["mean_episode_reward"] for row in stats.rows]
print("updates: %d  (episodes: %d)" % (len(rewards), 8 * len(rewards)))
print("mean episode reward, 5-update windows:")
for i in range(0, len(rewards), 5):
    chunk = rewards[i:i + 5]
    bar = "#" * int(2 * (15 + np.mean(chunk)))
    print("  u%02d-%02d  %6.2f  %s" % (i, i + len(chunk) - 1,
                                       np.mean(chunk), bar))
print("value loss: %.3f -> %.3f"
      % (stats.rows[0]["value_loss"], stats.rows[-1]["value_loss"]))
print("checkpoint written to demo_policy.npz")
