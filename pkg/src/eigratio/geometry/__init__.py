from .domain import (Point2, PolyLoop, Domain, CLASS_TAGS, SQRT_8_3, build, make_rectangle, make_triangle,
                     make_quadrilateral, make_ellipse, make_disk, make_sector, make_dumbbell, make_jigsaw)
from .random import (random_simple_polygon, random_star_polygon, perturbed_rectangle, rect_minus_star,
                     star_minus_rect, star_minus_star)
from .boolean import union, difference, with_small_hole
