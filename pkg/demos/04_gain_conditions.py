"""Evaluate the sufficient gain conditions for the benchmark and for a tuned configuration."""

from nashseek import cournot, graph as gr
from nashseek.conditions import RuleParams, check_theorem1, check_theorem2, check_theorem3
from nashseek.game import RegularityConstants

preset = cournot.build()
c = gr.constants(preset.graph)

# The benchmark gains are not covered by any of the sufficient conditions.
print("benchmark gains k=4, alpha=5")
for check in (check_theorem1, check_theorem2, check_theorem3):
    print(check(preset.params, c, preset.regularity).format())

# A denser network makes room for gains that satisfy the continuous-time condition.
dense = gr.constants(gr.complete(3))
print("\ncomplete graph on 3 nodes, k=10, alpha=15, theta=w=1")
print(check_theorem1(RuleParams(10.0, 15.0), dense, RegularityConstants(1.0, 1.0)).format())
