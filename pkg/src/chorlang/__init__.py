"""A typed choreographic language with endpoint projection and a network simulator."""

from .chor import show_chor, show_type
from .parser import parse, parse_chor
from .projection import project, project_system
from .semantics import run
from .statics import check_program

__all__ = ["check_program", "parse", "parse_chor", "project", "project_system", "run",
           "show_chor", "show_type"]
