"""Timed dichotomous risk-tolerance assessment toolkit.

Core pieces: a validated question bank with balanced 30-item selection, an
assessment session state machine with revalidation accounting, pure scoring
functions up to the worthiness index, a from-scratch multilayer perceptron
for risk-profile prediction, a deterministic emotion simulator, and a
synthetic cohort generator. A FastAPI service and a CLI sit on top.
"""

__version__ = "0.1.0"
