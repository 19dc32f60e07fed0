"""
RPIlab: Getting-started demo.

Copyright 2024 RPIlab Developers
"""

from matplotlib import pyplot
import numpy

from rpilab.corridors.computation import build_measure, tracking_corridor
from rpilab.corridors.types import Window, WindowKind
from rpilab.decoherence.computation import classical_corridor_scan, consistency_report
from rpilab.evolution.types import SliceScheme
from rpilab.model import presets
from rpilab.model.computation import branch_pointer_trajectory
from rpilab.rpi.computation import compare_rpi_vs_exact

# Arguments to functions are always keyword-only after the leading model, scheme,
# and measure, in order to be explicit yet flexible with argument ordering.

# A qubit in |+⟩ coupled to a pointer through H_I = g·σz⊗p. Each eigenbranch of σz
# drags the pointer packet along its own trajectory ±g·t.
strong = presets.build_preset("von_neumann_strong")
weak = presets.build_preset("von_neumann_weak")

# Two slices of duration 0.5, read out by box cells of width 0.5 tiling the pointer
# range.
s = SliceScheme(K=2, dt=0.5)
w = Window(kind=WindowKind.BOX, width=0.5)

# Strong coupling separates the branches by more than the cell width, so corridor
# histories barely interfere. Weak coupling keeps them overlapping.
for m in (strong, weak):
    report = consistency_report(m, s, build_measure(m, w))
    print(
        f"{m.name}: {len(report['corridors'])} corridors, "
        f"consistency ratio {report['consistency_ratio']:.3g}, "
        f"environment ratio {report['env_ratio']:.3g}, "
        f"completeness residual {report['completeness_residual']:.3g}"
    )

# Corridors following a branch trajectory at a constant offset carry most weight
# when they sit on the trajectory itself.
s_scan = SliceScheme(K=4, dt=0.25)
scan = classical_corridor_scan(strong, s_scan, build_measure(strong, w))

# The restricted path integral of the system alone reproduces a corridor that
# tracks one branch, the better the wider the corridor.
tracks = branch_pointer_trajectory(strong, times=s.weight_times)["mean_pointer"]
print("\nRestricted path integral vs. compound evolution, branch σz = +1:")

for width in (0.5, 2.0, 8.5):
    corridor = tracking_corridor(
        Window(kind=WindowKind.BOX, width=width), centers=tracks[0]
    )
    comparison = compare_rpi_vs_exact(strong, s, corridor)
    print(
        f"width {width}: trace distance {comparison['trace_dist']:.3g}, "
        f"probability {comparison['prob_exact']:.3g} (exact) vs. "
        f"{comparison['prob_rpi']:.3g} (rpi)"
    )

# Now make a nice plot.
fig, ax = pyplot.subplots(figsize=(8, 6))

for branch, label in ((0, "σz = +1"), (1, "σz = -1")):
    rows = scan["branch"] == branch
    order = numpy.argsort(scan["offset"][rows])
    ax.plot(
        scan["offset"][rows][order], scan["prob"][rows][order], "o-", label=label
    )

ax.set_title(f"RPIlab: corridor weights around branch trajectories, {strong.name}")
ax.set_xlabel("offset [pointer units]")
ax.set_ylabel("corridor probability [1]")
ax.legend()
fig.tight_layout()

pyplot.show()
