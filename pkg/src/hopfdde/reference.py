"""Published numbers for the reference parameter set, kept for comparison.

None of these are used as inputs to a computation except where a report
explicitly evaluates the pipeline at the published Hopf pair.
"""

REFERENCE_EQUILIBRIUM = {"x10": 5.0, "y10": 21.03417191, "x20": 2.498925919, "y20": 1.795140515}

#: (omega, tau) printed as the critical pair; it is not a root of the
#: characteristic function at the reference parameters.
REFERENCE_HOPF_PAIR = (0.1, 0.1001651263)

REFERENCE_NORMAL_FORM = {"mu2": -0.2101567953, "beta2": -0.3029980114, "T2": 0.1148699183}
