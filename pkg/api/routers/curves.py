"""
twistorkit sphere-curve commands
Regularity of the bolt lift and its continuation into perturbed targets.
"""

from models.config import Command, RunConfig
from models.report import CommandResult
from routers.base import CommandRouter
from services.config import resolve_direction
from services.hyperkaehler_curves import HyperkaehlerCurves, index_formula

router = CommandRouter(tag="curves")

GENERA = (0, 1, 2)


def _curves(config: RunConfig) -> HyperkaehlerCurves:
    return HyperkaehlerCurves(gap_factor=config.numerics.gap_factor, seed=config.numerics.seed)


# ═══════════════════════════════════════════════════════════════════════════════
# REGULARITY
# ═══════════════════════════════════════════════════════════════════════════════

@router.command(Command.SPHERE_REGULARITY, summary="kernel, cokernel and gap of the linearized operator")
def sphere_regularity(config: RunConfig) -> CommandResult:
    """
    Linearize the Cauchy–Riemann operator at the bolt lift of the
    Eguchi–Hanson bolt for every configured grid size.

    A regular sphere shows kernel 6 (the Möbius reparametrizations) and
    cokernel 0. No spectral gap raises InconclusiveError (exit 3).
    """
    rows = _curves(config).regularity_scan(config.numerics.sphere_n, sign=config.numerics.sign)
    return CommandResult(
        per_point=[row.model_dump(by_alias=True) for row in rows],
        summaries={
            "target": "eguchi-hanson-bolt",
            "sign": config.numerics.sign,
            "regular": all(r.kernel == 6 and r.cokernel == 0 for r in rows),
            "index_formula": {f"genus_{g}": index_formula(g) for g in GENERA},
        },
    )


# ═══════════════════════════════════════════════════════════════════════════════
# CONTINUATION
# ═══════════════════════════════════════════════════════════════════════════════

@router.command(Command.MECHANISM_DEMO, summary="continue the bolt sphere into g + t·h")
def mechanism_demo(config: RunConfig) -> CommandResult:
    """
    For each amplitude t, continue the bolt sphere to a curve of the
    pulled-back twistor structure of g + t·h and tabulate ∫ω over it
    next to the taming margin near the bolt.
    """
    numerics = config.numerics
    report = _curves(config).mechanism_demo(
        t_values=config.perturbation.t, n=numerics.sphere_n[0], max_iter=numerics.max_iter,
        tol=numerics.tolerance, sign=numerics.sign,
        direction=resolve_direction(config.perturbation))
    return CommandResult(
        per_point=[row.model_dump(by_alias=True) for row in report.rows],
        summaries={
            "grid_n": report.grid_n,
            "notes": report.notes,
            "all_converged": all(row.converged for row in report.rows),
        },
    )
