"""Total-solution-weight objective, binary search, and decision pipelines.

All arithmetic is scaled by 2 so the NP midpoint gamma = 1/2 disappears: a
string x scores sum over nodes of w * (2 * x_i * sat_i + (1 - x_i)), always
an integer.  Binary search over [0, 2W] recovers the exact maximum 2T with
ceil(log2(2W + 1)) threshold queries; one more pinned query at 2T decides
the instance, because at that threshold only the correct query string is
available.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .compress import (
    build_compressed,
    compute_output,
    is_correct_compressed,
    lift_query_string,
    resolved_input_bits,
)
from .errors import PipelineError
from .oracle import EvaluationBackend, OracleStats, ProofOracle, threshold_query
from .querygraph import (
    QueryDag,
    evaluate,
    is_correct_query_string,
    topological_order,
)
from .separator import build_separator_tree
from .weighting import rho_weights, total_weight

# eta = (alpha - beta) / 2 = 1/2 for NP, so the pipeline needs a weighting
# admissible for the constant 1/eta.
ADMISSIBILITY_C = 2


@dataclass(frozen=True)
class ThresholdInstance:
    """One threshold question: dag, weighting, scaled threshold, pinned bits."""

    dag: object
    weights: object
    threshold: int
    pins: dict


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one decision pipeline, with exact query accounting."""

    answer: int
    method: str
    t_scaled: object  # 2T, or None for the direct method
    w_total: object
    queries: int  # threshold queries spent on the decision itself
    budget: object  # ceil(log2(2W+1)) + 1, or None for the direct method
    query_string: object
    proof_queries: int
    stats: object

    def to_doc(self, include_transcript=False):
        doc = {
            "answer": self.answer,
            "method": self.method,
            "T_scaled": None if self.t_scaled is None else str(self.t_scaled),
            "W": None if self.w_total is None else str(self.w_total),
            "queries": self.queries,
            "budget": self.budget,
            "proof_queries": self.proof_queries,
            "witness": None
            if self.query_string is None
            else {str(k): v for k, v in sorted(self.query_string.items())},
        }
        if include_transcript:
            doc["transcript"] = self.stats.to_doc()
        return doc

    def serialize(self, include_transcript=False):
        return json.dumps(self.to_doc(include_transcript), sort_keys=True) + "\n"


def max_t_for_assignment(inst, x, proof_oracle):
    """Scaled objective 2t of the string x, proofs chosen best per node.

    Proofs enter as a cross product, so each node maximizes independently:
    a node claimed 1 contributes 2w when a satisfying proof exists given its
    resolved input wires, a node claimed 0 contributes w.
    """
    dag = inst.dag
    weights = inst.weights.weights
    total = 0
    if isinstance(dag, QueryDag):
        for node in dag.nodes:
            if x[node.id]:
                z = "".join("1" if x[p] else "0" for p in node.inputs)
                total += 2 * weights[node.id] * (
                    1 if proof_oracle.exists(node, z) else 0
                )
            else:
                total += weights[node.id]
    else:
        for cid, node in dag.nodes.items():
            if x[cid]:
                if node.is_conductor:
                    ok = compute_output(dag, dag.origin_dag.output, (), x) == 1
                else:
                    z = resolved_input_bits(dag, cid, x)
                    ok = proof_oracle.exists(dag.origin_query[node.origin], z)
                total += 2 * weights[cid] * (1 if ok else 0)
            else:
                total += weights[cid]
    return total


def search_budget(weights):
    """Threshold queries needed for one exact binary search: ceil(log2(2W+1))."""
    return (2 * total_weight(weights)).bit_length()


def binary_search_T(dag, weights, proof_oracle, stats, backend):
    """Exact maximum 2T by bitwise descent over [0, 2^B - 1] covering [0, 2W].

    Every probe is a real threshold query, so the count is exactly B; probes
    beyond 2W simply answer no.
    """
    bits = search_budget(weights)
    result = 0
    for bit in range(bits - 1, -1, -1):
        candidate = result | (1 << bit)
        inst = ThresholdInstance(dag, weights, candidate, {})
        if threshold_query(inst, proof_oracle, stats, backend):
            result = candidate
    return result


def extract_query_string(dag, weights, t_tilde, proof_oracle, stats, backend, order):
    """Recover the string attaining 2t >= t_tilde, one pinned query per node.

    Bits are pinned in the given order; a prefix extends to the maximizer as
    long as every pinned bit matches it, and at threshold 2T the maximizer is
    unique and correct.
    """
    pins = {}
    for nid in order:
        pins[nid] = 1
        inst = ThresholdInstance(dag, weights, t_tilde, dict(pins))
        if not threshold_query(inst, proof_oracle, stats, backend):
            pins[nid] = 0
    return pins


def decide_compress(g, witness=False, backend=None, stats=None):
    """Full compression pipeline: separator tree, compressed graph, binary
    search, one pinned query on the conductor.

    Witness mode spends |V*| extra pinned queries (outside the budget) to
    recover the compressed query string, then lifts it back to g.
    """
    stats = stats if stats is not None else OracleStats()
    proof_oracle = ProofOracle(stats)
    backend = backend if backend is not None else EvaluationBackend()
    tree = build_separator_tree(g)
    gstar, fstar = build_compressed(g, tree)
    t_tilde = binary_search_T(gstar, fstar, proof_oracle, stats, backend)
    final = ThresholdInstance(gstar, fstar, t_tilde, {gstar.conductor_id: 1})
    answer = threshold_query(final, proof_oracle, stats, backend)
    used = stats.threshold_queries
    query_string = None
    if witness:
        xstar = extract_query_string(
            gstar, fstar, t_tilde, proof_oracle, stats, backend, gstar.topo_order()
        )
        if not is_correct_compressed(gstar, xstar, proof_oracle):
            raise PipelineError("extracted compressed string is not correct")
        query_string = lift_query_string(g, gstar, xstar)
        if not is_correct_query_string(g, query_string, proof_oracle):
            raise PipelineError("lifted query string is not correct")
    return SolveReport(
        answer=1 if answer else 0,
        method="compress",
        t_scaled=t_tilde,
        w_total=total_weight(fstar),
        queries=used,
        budget=search_budget(fstar) + 1,
        query_string=query_string,
        proof_queries=stats.proof_queries,
        stats=stats,
    )


def decide_depth(g, witness=False, backend=None, stats=None):
    """Bounded-depth pipeline: no graph transformation, the depth-based
    weighting directly on g, then the same search and final pinned query."""
    stats = stats if stats is not None else OracleStats()
    proof_oracle = ProofOracle(stats)
    backend = backend if backend is not None else EvaluationBackend()
    rho = rho_weights(g, ADMISSIBILITY_C)
    t_tilde = binary_search_T(g, rho, proof_oracle, stats, backend)
    final = ThresholdInstance(g, rho, t_tilde, {g.output: 1})
    answer = threshold_query(final, proof_oracle, stats, backend)
    used = stats.threshold_queries
    query_string = None
    if witness:
        query_string = extract_query_string(
            g, rho, t_tilde, proof_oracle, stats, backend, topological_order(g)
        )
        if not is_correct_query_string(g, query_string, proof_oracle):
            raise PipelineError("extracted query string is not correct")
    return SolveReport(
        answer=1 if answer else 0,
        method="depth",
        t_scaled=t_tilde,
        w_total=total_weight(rho),
        queries=used,
        budget=search_budget(rho) + 1,
        query_string=query_string,
        proof_queries=stats.proof_queries,
        stats=stats,
    )


def decide_direct(g, witness=False, stats=None):
    """Baseline: straight evaluation, one proof query per node, no thresholds."""
    stats = stats if stats is not None else OracleStats()
    proof_oracle = ProofOracle(stats)
    trace = evaluate(g, proof_oracle)
    return SolveReport(
        answer=trace.answer,
        method="direct",
        t_scaled=None,
        w_total=None,
        queries=0,
        budget=None,
        query_string=dict(trace.bits) if witness else None,
        proof_queries=stats.proof_queries,
        stats=stats,
    )
