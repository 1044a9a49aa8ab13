"""Valid optimal assignment kernels from strong base kernels, and graph kernels built on them."""

from oakernel.errors import (
    HierarchyMismatch,
    InstanceError,
    InvalidKernelMatrix,
    InvalidMatrix,
    InvalidParameter,
    NotStrongError,
    OAKernelError,
    ParseError,
    TooLarge,
    UnknownGraph,
    UnknownKernel,
    UnknownNode,
    UnknownObject,
)
from oakernel.graph import Dataset, Graph, parse_dataset, synthetic_dataset, synthetic_graph, write_dataset
from oakernel.hierarchy import (
    Hierarchy,
    build_hierarchy,
    canonicalize,
    feature_map,
    image_size_bound,
    induced_kernel,
    induced_matrix,
    is_strong,
    lowest_common_ancestor,
)
from oakernel.assignment import (
    NULL,
    Histogram,
    assignment_kernel,
    greedy_assignment,
    histogram,
    intersect,
    pad,
    solve_hungarian,
)
from oakernel.wl import ColourSequence, refine, wl_feature_vector, wl_hierarchy
from oakernel.kernels import KERNELS, GramMatrix, gram, normalize
from oakernel.validation import PsdReport, brute_force_assignment, check_psd, random_hierarchy

__version__ = "0.1.0"
