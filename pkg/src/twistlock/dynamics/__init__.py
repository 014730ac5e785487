from .dde import DelayedKuramotoSystem, HistoryBuffer, history_depth, step_delayed
from .measures import PhaseState, lock_quality, order_parameter, perturbation, similarity
from .ode import KuramotoSystem, rk4_step, stable_dt, step_kuramoto
from .operator import ComplexState, OperatorIteration, step_operator
from .runner import DdeStepper, OdeStepper, OperatorStepper, Probe, StopRule, Trajectory, run_until

__all__ = [
    "PhaseState",
    "similarity",
    "order_parameter",
    "lock_quality",
    "perturbation",
    "KuramotoSystem",
    "rk4_step",
    "stable_dt",
    "step_kuramoto",
    "HistoryBuffer",
    "DelayedKuramotoSystem",
    "history_depth",
    "step_delayed",
    "ComplexState",
    "OperatorIteration",
    "step_operator",
    "Probe",
    "StopRule",
    "Trajectory",
    "OdeStepper",
    "DdeStepper",
    "OperatorStepper",
    "run_until",
]
