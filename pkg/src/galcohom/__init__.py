"""Exact group cohomology and spectral-sequence differentials."""

from .cohom import Cohomology, CohClass
from .gmod import GModule, build_group, build_module, load_module_spec, module_from_spec
from .localarith import Place, creutz_sum, hilbert_symbol
from .suites import run_criterion, run_suite

__all__ = ["Cohomology", "CohClass", "GModule", "build_group", "build_module", "load_module_spec",
           "module_from_spec", "Place", "creutz_sum", "hilbert_symbol", "run_criterion", "run_suite"]
