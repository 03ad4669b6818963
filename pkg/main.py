import numpy as np
from fastapi import FastAPI
from mcp.server.fastmcp import FastMCP

from bdsep.oracle import separate
from conicsolver.models import SolverError
from gcpp.bruteforce import misocp_bruteforce
from gcpp.burer import burer_reformulate
from gcpp.models import MISOCP, SOLVE_VARIANTS, ExchangeError, MisocpInstance
from gcpp.relaxations import solve_relaxation
from gdnn.membership import check_membership
from gdnn.models import MEMBERSHIP_TOL
from harness.instances import generate_instance, generate_m44_vector
from harness.io import to_jsonable
from harness.models import Rejected
from jordan.models import ConeSpec

app = FastAPI()

mcp = FastMCP(
    name="GDNN Cone Toolkit MCP",
)


@mcp.tool(
    name="check_membership",
    description="Check whether a symmetric matrix lies in the NN, ZVP or BD cone (or K_ZVP,0 / K_NN,r) over a cone spec",
)
def check_membership_tool(cone: dict, X: list, variant: str, tol: float = MEMBERSHIP_TOL, level: int = 0):
    try:
        spec = ConeSpec.from_dict(cone)
        result = check_membership(spec, np.asarray(X, dtype=float), variant, tol=tol, level=level)
    except (ValueError, SolverError) as exc:
        return {"error": str(exc)}
    return to_jsonable(result.to_dict())


@mcp.tool(
    name="separate_matrix",
    description="Run the BD separation oracle: report Inside or a cutting plane H with its source case",
)
def separate_matrix(cone: dict, X: list, gamma: float = 0.0):
    try:
        outcome = separate(ConeSpec.from_dict(cone), np.asarray(X, dtype=float), gamma)
    except ValueError as exc:
        return {"error": str(exc)}
    return to_jsonable(outcome.to_dict())


@mcp.tool(
    name="solve_instance",
    description="Solve a mixed 0-1 SOCP instance by brute force (misocp) or one of its sdp/zvp/nn/bd relaxations",
)
def solve_instance(instance: dict, variant: str = "zvp"):
    if variant not in SOLVE_VARIANTS:
        return {"error": f"variant must be one of {', '.join(SOLVE_VARIANTS)}"}
    try:
        inst = MisocpInstance.from_dict(instance)
        if variant == MISOCP:
            value, x = misocp_bruteforce(inst)
            return to_jsonable({"variant": MISOCP, "value": value, "x": x})
        result = solve_relaxation(burer_reformulate(inst), variant)
    except (ValueError, SolverError, ExchangeError) as exc:
        return {"error": str(exc)}
    return to_jsonable(result.to_dict())


@mcp.tool(
    name="generate_misocp_instance",
    description="Generate a random mixed 0-1 SOCP instance with n variables from a seed",
)
def generate_misocp_instance(n: int, seed: int = 0):
    try:
        return to_jsonable(generate_instance(n, seed).to_dict())
    except ValueError as exc:
        return {"error": str(exc)}


@mcp.tool(
    name="sample_m44_vector",
    description="Draw one degree-4 moment vector in four variables with a PSD moment matrix",
)
def sample_m44_vector(seed: int = 0):
    try:
        return to_jsonable(generate_m44_vector(seed).to_dict())
    except Rejected as exc:
        return {"error": str(exc)}


@mcp.tool(
    name="list_reports",
    description="List stored experiment reports",
)
def list_reports():
    from harness.store import list_reports as stored_reports

    return stored_reports()


app.mount("/", mcp.sse_app())
