"""Walk through the benchmark network and the Cournot cost structure."""

import numpy as np

from nashseek import cournot, graph as gr
from nashseek.game import estimate_constants, subdiff

# Five firms talk over a ring. The spectral constants below feed every gain condition.
ring = gr.cycle(5)
c = gr.constants(ring)
print("ring of five firms")
print(f"  lambda2 = {c.lambda2:.6f}")
print(f"  ||L||   = {c.lap_norm:.6f}")
print(f"  ||RL||  = {c.rl_norm:.6f}")

# Firm 1 starts exactly on its capacity kink (x1 = c1 = 25), so its subdifferential is an interval.
game = cournot.cournot_game()
x0 = np.array(cournot.X0)
sd = subdiff(game, 0, x0[:1], x0[1:])
print("\nfirm 1 at the initial point")
print(f"  cost                  = {float(game.cost(0, x0.reshape(5, 1))):.4f}")
print(f"  min-norm selection    = {sd.selection[0]:.4f} +/- {sd.interval_radius[0]:.1f}")
print(f"  distance of 0 to subdifferential = {sd.distance_to_zero:.4f}")

# Lipschitz and monotonicity constants of the pseudo-gradient, sampled on [0, 50]^5.
for linear in (False, True):
    r = estimate_constants(cournot.cournot_game(linear), box=(0.0, 50.0), samples=10_000, seed=42)
    label = "linear aggregate " if linear else "squares aggregate"
    print(f"\n{label}: theta ~ {r.theta:.4f}, w ~ {r.w:.4f}")
