__version__ = '0.1.0'

from .errors import *
from .settings import Settings, get_settings, override
from .geometry import Domain, PolyLoop, build
from .meshgen import Mesh, triangulate, refine, mesh_for
from .fem import Pencil, assemble
from .eig import Spectrum, Solution, smallest_eigenpairs, solve_domain
from .analytic import k2, rectangle_curve, circles_curve, disjoint_union_ratios
from .bounds import envelope, envelope_curve
from .serialization import save_domain, load_domain, dump_mesh, load_mesh
from . import geometry
from . import scan
from . import perturb
