"""Explicit-state checking of consent protocols against PILOT privacy policies."""
from .casestudies import CaseStudy, RefinementMapping, build_direct_system, build_indirect_system
from .checker import (InvariantSpec, Trace, Verdict, check_invariant, check_refinement, explore,
                      pr1, pr2, replay, simulate)
from .conditions import (FF, TT, And, Apply, Const, Interpretation, Not, Pred, Ref, eval_condition,
                         evaluate)
from .errors import *  # noqa: F401,F403
from .events import Request, Send, Transfer
from .model import load_model, parse_model
from .ontology import UNDEFINED, Ontology, PartialOrder, leq, load_ontology
from .policy import (BOTTOM, DataCommunicationRule, DataUsageRule, PilotPolicy, active_policy,
                     active_transfer, comparable, subsumes_dcr, subsumes_dur, subsumes_policy)
from .proggraph import ProgramGraph, compose
from .semantics import (ModelConfig, NotEnabled, SystemState, abstract_ts, apply_request,
                        apply_send, apply_transfer, enabled_events)
from .universe import AbstractUniverse, StructuralUniverse

__version__ = "0.1.0"
