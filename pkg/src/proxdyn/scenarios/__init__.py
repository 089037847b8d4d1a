from .formation import (FormationProblem, FormationSpec, build_constraint_matrix, formation_problem,
                        regular_polygon, star_polygon)
from .quadratic import QuadraticToy, circle_target, quadratic_toy, static_target, unit_step_target
from .subspace import SubspaceProblem, SubspaceStreamSpec, subspace_problem

__all__ = [
    "FormationProblem", "FormationSpec", "build_constraint_matrix", "formation_problem",
    "regular_polygon", "star_polygon",
    "QuadraticToy", "circle_target", "quadratic_toy", "static_target", "unit_step_target",
    "SubspaceProblem", "SubspaceStreamSpec", "subspace_problem",
]
