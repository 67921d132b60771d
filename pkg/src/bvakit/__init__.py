"""Bounded variable addition for 2-CNF: simplification, rectifier-network
constructions, a greedy BVA heuristic and equivalence checks."""
from .cnf_core import (Formula, binary_array, emit_dimacs, eliminate_variable, make_clause,
                       parse_dimacs, resolve, restrict, solve_2sat, unit_propagate)
from .construct import (NechiporukParams, ReencodeReport, amo_direct, amo_ladder, amo_product,
                        auto_reencode, monotone_reencode, nechiporuk_monotone, nechiporuk_params,
                        nechiporuk_simple, reencode_general)
from .diagram import NEG, POS, Diagram, PolarizedDiagram, diagram_of, polarize, topo_order
from .errors import *  # noqa: F401,F403
from .heuristic import Biclique, apply_bva_step, heuristic_step, improve_prn, run_heuristic
from .simplify import SimplificationResult, is_simple, reassemble, simplify_to_simple
from .sprn import (Prn, check_realizes, check_strict, contract_unit_degree, formula_of, prn_of,
                   reduce_biclique, valid_walks_from)
from .verify import Verdict, audit, check_encoding, eliminate_auxiliaries

__version__ = "0.1.0"
