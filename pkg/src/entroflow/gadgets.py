"""Constructors for the two test-network families and their witness codes.

`build_incremental(h)` produces a two-session network with hierarchical
sink requirements whose rate-capacity tuple is the linear image of an
entropy vector h: a source part emits per-coordinate streams U_i (rate
h(i) each) and a bottleneck-fanned family V_i, one cut-probe subnetwork
per nonempty subset, and one increment-probe subnetwork per (subset,
fresh element) pair.  `incremental_code(q)` builds the explicit code that
realizes the tuple whenever h comes from a quasi-uniform distribution q.

`build_secure(c, d)` produces the single-session secure network in which
any admissible code is forced to push a rate-c key onto the relay edge;
`otp_code(c, d)` is its explicit one-time-pad witness.  `adhere(inner)`
wires one copy of the secure network per (session, sink) pair of an
arbitrary multicast problem, sharing one key stream per session, so that
the secure problem is admissible exactly when the inner multicast is.

The drawings these networks come from are not part of the artifact;
every reconstruction choice is therefore recorded as a machine-checkable
obligation (exact min-cut values, forced-equality chains on subnetwork
LPs) inside a ReconstructionContract, and `verify_contract` runs them.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

from entroflow.codes import CodeBuilder, NetworkCode, minimal_source_alphabet
from entroflow.entropy import (
    EntropyVector,
    JointDistribution,
    as_fraction,
    is_quasi_uniform,
    quasi_uniform_vector_of,
)
from entroflow.lp import ShannonSolver, build_shannon_lp, verify_proof_chain
from entroflow.network import (
    UNBOUNDED,
    Capacity,
    ConnectionRequirement,
    Edge,
    Network,
    NetworkProblem,
    RateCapacityTuple,
    Session,
    Wiretap,
    WiretapPattern,
    min_cut,
    validate,
)

__all__ = [
    "Obligation",
    "ObligationResult",
    "ContractReport",
    "ReconstructionContract",
    "IncrementalGadget",
    "SecureGadget",
    "AdheredGadget",
    "QuasiUniformSpec",
    "build_incremental",
    "incremental_code",
    "build_secure",
    "otp_code",
    "adhere",
    "compose_adhered_code",
    "verify_contract",
    "quasi_uniform_library",
]


# ----------------------------------------------------------------------
# contracts


@dataclass(frozen=True)
class Obligation:
    name: str
    kind: str  # "chain-claim" | "min-cut"
    subnetwork: Optional[tuple[str, ...]] = None
    expression: Optional[str] = None
    relation: Optional[str] = None
    value: Optional[str] = None
    expected: str = "forced"  # for chain claims: "forced" | "contradicted"
    source: Optional[str] = None
    sink: Optional[str] = None

    def to_dict(self) -> dict:
        doc = {"name": self.name, "kind": self.kind}
        if self.kind == "chain-claim":
            doc.update(
                subnetwork=list(self.subnetwork) if self.subnetwork else None,
                expression=self.expression,
                relation=self.relation,
                value=self.value,
                expected=self.expected,
            )
        else:
            doc.update(source=self.source, sink=self.sink, value=self.value)
        return doc


@dataclass(frozen=True)
class ObligationResult:
    name: str
    ok: bool
    detail: str

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class ContractReport:
    results: tuple[ObligationResult, ...]

    @property
    def all_ok(self) -> bool:
        return all(r.ok for r in self.results)

    def describe(self) -> str:
        return "\n".join(
            f"{'PASS' if r.ok else 'FAIL'} {r.name}: {r.detail}" for r in self.results
        )


@dataclass(frozen=True)
class ReconstructionContract:
    obligations: tuple[Obligation, ...]
    notes: tuple[str, ...] = ()

    def to_json(self) -> str:
        return json.dumps(
            {
                "obligations": [o.to_dict() for o in self.obligations],
                "notes": list(self.notes),
            },
            indent=2,
        )


def verify_contract(problem: NetworkProblem, contract: ReconstructionContract) -> ContractReport:
    """Execute every obligation: min-cut values exactly, claim chains by LP."""
    results: list[ObligationResult] = []
    # Group chain claims sharing a subnetwork so one solver serves them all.
    groups: dict[tuple, list[Obligation]] = {}
    order: list[tuple] = []
    for ob in contract.obligations:
        if ob.kind == "min-cut":
            got = min_cut(problem, ob.source, ob.sink)
            want = Capacity.of(ob.value)
            ok = got == want
            results.append(
                ObligationResult(ob.name, ok, f"min_cut({ob.source},{ob.sink}) = {got}, expected {want}")
            )
        elif ob.kind == "chain-claim":
            key = ob.subnetwork
            if key not in groups:
                groups[key] = []
                order.append(key)
            groups[key].append(ob)
        else:
            results.append(ObligationResult(ob.name, False, f"unknown kind {ob.kind!r}"))
    for key in order:
        obs = groups[key]
        lp = build_shannon_lp(problem, variables=key)
        solver = ShannonSolver(lp)
        claims = [(ob.name, ob.expression, ob.relation, ob.value) for ob in obs]
        report = verify_proof_chain(solver, claims)
        for ob, verdict in zip(obs, report.verdicts):
            ok = verdict.status == ob.expected
            detail = verdict.describe()
            if detail.startswith(ob.name + ": "):
                detail = detail[len(ob.name) + 2 :]
            results.append(ObligationResult(ob.name, ok, detail))
    return ContractReport(tuple(results))


# ----------------------------------------------------------------------
# incremental-multicast network


@dataclass(frozen=True)
class IncrementalGadget:
    problem: NetworkProblem
    contract: ReconstructionContract
    delta: RateCapacityTuple
    u_messages: tuple[str, ...]
    v_messages: tuple[str, ...]


def _subset_name(members: Sequence[int]) -> str:
    return "".join(str(i + 1) for i in sorted(members))


def _subsets(n: int, proper: bool = False, nonempty: bool = True):
    for mask in range(1 if nonempty else 0, 1 << n):
        if proper and mask == (1 << n) - 1:
            continue
        yield tuple(i for i in range(n) if mask >> i & 1)


def build_incremental(h: EntropyVector) -> IncrementalGadget:
    """The two-session incremental network whose tuple is linear in h.

    Requires exact rational coordinates with h(full) the maximum (every
    derived capacity must be nonnegative); the offending subset is named
    otherwise.  The topology depends only on the ground size; h only sets
    the rates and capacities.
    """
    if not h.is_rational():
        raise ValueError("the incremental construction needs exact rational coordinates")
    n = h.ground.size
    if n < 2:
        raise ValueError("need at least two coordinates")
    if n > 8:
        raise ValueError("ground sizes above 8 are outside desk scale")
    full = h.ground.full_mask

    def hv(mask: int) -> Fraction:
        return Fraction(h.value_of_mask(mask))

    for mask in range(1, full + 1):
        if hv(mask) < 0:
            raise ValueError(f"h{h.ground.format_subset(mask)} is negative")
        if hv(full) - hv(mask) < 0:
            raise ValueError(
                f"negative capacity: h(full) - h{h.ground.format_subset(mask)} < 0"
            )

    nodes = ["src", "tU", "dB"]
    edges: list[Edge] = []
    forwards: list[tuple[str, str]] = []  # (parent message, destination node)

    def fwd(parent: str, node: str) -> None:
        forwards.append((parent, node))

    u_msgs = []
    v_msgs = []
    for i in range(n):
        nodes.append(f"dU{i + 1}")
        edges.append(Edge(f"U{i + 1}", "src", f"dU{i + 1}", Capacity(hv(1 << i))))
        u_msgs.append(f"U{i + 1}")
        fwd(f"U{i + 1}", "tU")
    edges.append(Edge("B", "src", "dB", Capacity(hv(full))))
    for i in range(n):
        nodes.append(f"dV{i + 1}")
        edges.append(Edge(f"V{i + 1}", "dB", f"dV{i + 1}", Capacity(hv(1 << i))))
        v_msgs.append(f"V{i + 1}")
    t1_sinks = []
    for subset in _subsets(n):
        a = _subset_name(subset)
        mask = sum(1 << i for i in subset)
        m_node, t_node = f"m1[{a}]", f"t1[{a}]"
        nodes += [m_node, t_node]
        t1_sinks.append(t_node)
        edges.append(Edge(f"D1[{a}]", "src", t_node, Capacity(hv(full) - hv(mask))))
        for j in subset:
            fwd(f"V{j + 1}", m_node)
        edges.append(Edge(f"M1[{a}]", m_node, t_node, Capacity(hv(mask))))
        for i in range(n):
            fwd(f"U{i + 1}", t_node)
    p0_sinks = []
    p1_sinks = []
    for subset in _subsets(n, proper=True):
        a = _subset_name(subset)
        mask = sum(1 << i for i in subset)
        for i in range(n):
            if i in subset:
                continue
            tag = f"{a}.{i + 1}"
            g, p0, p1 = f"g[{tag}]", f"p0[{tag}]", f"p1[{tag}]"
            nodes += [g, p0, p1]
            p0_sinks.append(p0)
            p1_sinks.append(p1)
            fwd(f"U{i + 1}", g)
            fwd(f"V{i + 1}", g)
            hi = hv(1 << i)
            edges.append(Edge(f"W1[{tag}]", g, p0, Capacity(hi)))
            edges.append(Edge(f"W2[{tag}]", g, p0, Capacity(hi)))
            edges.append(Edge(f"W3[{tag}]", g, p1, Capacity(hi)))
            edges.append(
                Edge(f"D2[{tag}]", "src", p0, Capacity(hv(full) - hv(mask | 1 << i)))
            )
            for j in subset:
                fwd(f"V{j + 1}", p0)
            for j in range(n):
                fwd(f"U{j + 1}", p0)
            for j in range(n):
                if j != i:
                    fwd(f"U{j + 1}", p1)
    for parent, node in forwards:
        edges.append(Edge(f"{parent}>{node}", _head_of(edges, parent), node, UNBOUNDED, parent))
    rate0 = sum((hv(1 << i) for i in range(n)), Fraction(0))
    sessions = (
        Session("S0", rate0, "src", tuple(sorted(["tU"] + p1_sinks))),
        Session("S1", hv(full), "src", tuple(sorted(t1_sinks + p0_sinks))),
    )
    problem = NetworkProblem(
        network=Network(tuple(nodes), tuple(edges)),
        requirement=ConnectionRequirement(sessions, ("S0", "S1")),
    )
    errors = validate(problem)
    if errors:
        raise AssertionError("construction bug: " + "; ".join(errors))
    contract = _incremental_contract(h)
    return IncrementalGadget(
        problem=problem,
        contract=contract,
        delta=problem.rate_capacity,
        u_messages=tuple(u_msgs),
        v_messages=tuple(v_msgs),
    )


def _head_of(edges: Sequence[Edge], message: str) -> str:
    for e in edges:
        if e.id == message:
            return e.head
    raise KeyError(message)


def _incremental_contract(h: EntropyVector) -> ReconstructionContract:
    n = h.ground.size
    full = h.ground.full_mask

    def hv(mask: int) -> Fraction:
        return Fraction(h.value_of_mask(mask))

    u_all = [f"U{i + 1}" for i in range(n)]
    v_all = [f"V{i + 1}" for i in range(n)]
    full_name = _subset_name(tuple(range(n)))
    source_ground = tuple(
        ["S0", "S1"] + u_all + ["B"] + v_all + [f"D1[{full_name}]", f"M1[{full_name}]"]
    )
    obligations: list[Obligation] = []
    for i in range(n):
        obligations.append(
            Obligation(
                name=f"u{i + 1}-rate-pinned",
                kind="chain-claim",
                subnetwork=source_ground,
                expression=f"H(U{i + 1})",
                relation="=",
                value=str(hv(1 << i)),
            )
        )
    obligations.append(
        Obligation(
            name="v-joint-pinned",
            kind="chain-claim",
            subnetwork=source_ground,
            expression="H(" + ",".join(v_all) + ")",
            relation="=",
            value=str(hv(full)),
        )
    )
    obligations.append(
        Obligation(
            name="streams-decompose",
            kind="chain-claim",
            subnetwork=source_ground,
            expression="H(" + ",".join(u_all + v_all) + ")",
            relation="=",
            value=str(sum((hv(1 << i) for i in range(n)), Fraction(0)) + hv(full)),
        )
    )
    for subset in _subsets(n):
        a = _subset_name(subset)
        mask = sum(1 << i for i in subset)
        ground = tuple(
            ["S0", "S1"] + u_all + ["B"]
            + [f"V{j + 1}" for j in subset]
            + [f"D1[{a}]", f"M1[{a}]"]
        )
        obligations.append(
            Obligation(
                name=f"v[{a}]-lower",
                kind="chain-claim",
                subnetwork=ground,
                expression="H(" + ",".join(f"V{j + 1}" for j in subset) + ")",
                relation=">=",
                value=str(hv(mask)),
            )
        )
    for subset in _subsets(n, proper=True):
        a = _subset_name(subset)
        mask = sum(1 << i for i in subset)
        for i in range(n):
            if i in subset:
                continue
            tag = f"{a}.{i + 1}"
            ground = tuple(
                ["S0", "S1"] + u_all
                + sorted({f"V{j + 1}" for j in subset} | {f"V{i + 1}"})
                + [f"W1[{tag}]", f"W2[{tag}]", f"W3[{tag}]", f"D2[{tag}]"]
            )
            valpha = ",".join(f"V{j + 1}" for j in sorted(subset))
            obligations.append(
                Obligation(
                    name=f"increment[{tag}]",
                    kind="chain-claim",
                    subnetwork=ground,
                    expression=f"H(V{i + 1}|{valpha})",
                    relation="=",
                    value=str(hv(mask | 1 << i) - hv(mask)),
                )
            )
            obligations.append(
                Obligation(
                    name=f"lower-receiver-gets-u[{tag}]",
                    kind="chain-claim",
                    subnetwork=ground,
                    expression=f"H(U{i + 1}|W3[{tag}])",
                    relation="=",
                    value="0",
                )
            )
    notes = (
        "The topology depends only on the coordinate count; rates and "
        "capacities are linear in h.",
        "Cut-probe sinks demand both sessions (hierarchical order) and "
        "receive all U streams as side information, so the second session's "
        "cut arithmetic is unchanged.",
        "Increment-probe direct edges carry h(full) - h(subset+element); "
        "the obligations pin exactly the conclusions the construction needs.",
    )
    return ReconstructionContract(tuple(obligations), notes)


@dataclass(frozen=True)
class QuasiUniformSpec:
    """A distribution certified quasi-uniform, the basis for alphabets."""

    dist: JointDistribution

    def __post_init__(self) -> None:
        if not is_quasi_uniform(self.dist):
            raise ValueError("distribution is not quasi-uniform")

    @property
    def vector(self) -> EntropyVector:
        return quasi_uniform_vector_of(self.dist)


def incremental_code(q: Union[QuasiUniformSpec, JointDistribution]) -> NetworkCode:
    """The explicit admissible code for build_incremental(vector of q).

    The second session is uniform over q's joint support with the V
    streams as coordinate maps; the first session is a fresh tuple of
    independent uniforms matching the per-coordinate support sizes.
    Subset sinks decode from (marginal rank, within-class rank) pairs;
    increment probes send the fresh coordinate both in the clear and
    masked by its V partner.
    """
    if isinstance(q, QuasiUniformSpec):
        q = q.dist
    spec = QuasiUniformSpec(q)
    h = spec.vector
    if not h.is_rational():
        raise ValueError(
            "support sizes must be powers of two so capacities stay rational"
        )
    gadget = build_incremental(h)
    problem = gadget.problem
    n = q.ground().size
    points = sorted(q.pmf)  # joint support, the alphabet of S1
    supp = [sorted({pt[i] for pt in points}) for i in range(n)]
    sizes = [len(s) for s in supp]
    rank = [
        {sym: r for r, sym in enumerate(supp[i])} for i in range(n)
    ]

    def coord(s1: int, i: int) -> int:
        return rank[i][points[s1][i]]

    def class_rank(s1: int, members: tuple[int, ...]) -> int:
        pt = points[s1]
        mates = [p for p in points if all(p[j] == pt[j] for j in members)]
        return mates.index(pt)

    def class_size(members: tuple[int, ...]) -> int:
        sizes_seen = {}
        for p in points:
            key = tuple(p[j] for j in members)
            sizes_seen[key] = sizes_seen.get(key, 0) + 1
        out = set(sizes_seen.values())
        assert len(out) == 1, "quasi-uniform classes must be balanced"
        return out.pop()

    def marginal_rank(values: Mapping[int, int]) -> int:
        members = tuple(sorted(values))
        seen = sorted({tuple(p[j] for j in members) for p in points})
        key = tuple(supp[j][values[j]] for j in members)
        try:
            return seen.index(key)
        except ValueError:
            return 0  # off-support input combination, never produced

    builder = CodeBuilder(problem)
    s0_size = 1
    for k in sizes:
        s0_size *= k
    builder.source("S0", s0_size)
    builder.source("S1", len(points))

    def u_digit(s0: int, i: int) -> int:
        for j in range(n - 1, i, -1):
            s0 //= sizes[j]
        return s0 % sizes[i]

    for i in range(n):
        builder.edge(f"U{i + 1}", sizes[i], lambda v, i=i: u_digit(v["S0"], i))
    builder.edge("B", len(points), lambda v: v["S1"])
    for i in range(n):
        builder.edge(f"V{i + 1}", sizes[i], lambda v, i=i: coord(v["B"], i))
    for subset in _subsets(n):
        a = _subset_name(subset)
        members = tuple(sorted(subset))
        builder.edge(
            f"D1[{a}]", class_size(members), lambda v, m=members: class_rank(v["S1"], m)
        )
        msize = len({tuple(p[j] for j in members) for p in points})
        builder.edge(
            f"M1[{a}]",
            msize,
            lambda v, m=members: marginal_rank({j: v[f"V{j + 1}>m1[{_subset_name(m)}]"] for j in m}),
        )
    for subset in _subsets(n, proper=True):
        a = _subset_name(subset)
        for i in range(n):
            if i in subset:
                continue
            tag = f"{a}.{i + 1}"
            k = sizes[i]
            builder.edge(f"W1[{tag}]", k, lambda v, i=i, tag=tag: v[f"U{i + 1}>g[{tag}]"])
            builder.edge(
                f"W2[{tag}]",
                k,
                lambda v, i=i, tag=tag, k=k: (
                    v[f"U{i + 1}>g[{tag}]"] + v[f"V{i + 1}>g[{tag}]"]
                )
                % k,
            )
            builder.edge(f"W3[{tag}]", k, lambda v, i=i, tag=tag: v[f"U{i + 1}>g[{tag}]"])
            members2 = tuple(sorted(subset + (i,)))
            fiber2 = class_size(members2)
            builder.edge(
                f"D2[{tag}]", fiber2, lambda v, m=members2: class_rank(v["S1"], m)
            )
    return builder.build()


# ----------------------------------------------------------------------
# secure-multicast network


@dataclass(frozen=True)
class SecureGadget:
    problem: NetworkProblem
    contract: ReconstructionContract
    c: Fraction
    d: Fraction


def build_secure(c: Union[Fraction, int, str], d: Union[Fraction, int, str]) -> SecureGadget:
    """Single-session secure network: rate-d source, parametrized by 0 < c < d.

    The side branch splits at the first relay into a tapped channel and a
    two-hop key path; the sink needs both the clear d-c stream and the
    unmasked c stream.  The contract pins every forced equality of the
    admissibility argument, ending with "the key is a function of the
    relayed key" in both directions.
    """
    c = as_fraction(c)
    d = as_fraction(d)
    if not 0 < c < d:
        raise ValueError("parameters must satisfy 0 < c < d")
    nodes = ("s", "a", "m", "b", "t")
    edges = (
        Edge("W1", "s", "a", Capacity(c)),
        Edge("W2", "s", "t", Capacity(d - c)),
        Edge("W3", "a", "b", Capacity(c)),
        Edge("K", "a", "m", Capacity(c)),
        Edge("W4", "m", "b", Capacity(c)),
        Edge("W5", "b", "t", Capacity(c)),
    )
    problem = NetworkProblem(
        network=Network(nodes, edges),
        requirement=ConnectionRequirement(
            (Session("X", d, "s", ("t",)),)
        ),
        wiretaps=WiretapPattern((Wiretap(("X",), ("W3",)),)),
        randomness_nodes=("a",),
    )
    chain = [
        ("masked-channel-reveals-nothing", "I(W1;W3)", "=", "0"),
        ("upper-branch-pinned", "H(W1)", "=", str(c)),
        ("clear-branch-pinned", "H(W2)", "=", str(d - c)),
        ("unmasked-stream-pinned", "H(W5)", "=", str(c)),
        ("unmasked-stream-is-source-half", "H(W5|X)", "=", "0"),
        ("sink-side-recovers-upper", "H(W1|W3,W4)", "=", "0"),
        ("key-side-recovers-upper", "H(W1|K,W3)", "=", "0"),
        ("key-rate-pinned", "H(K)", "=", str(c)),
        ("relayed-key-pinned", "H(W4)", "=", str(c)),
        ("key-recoverable-from-tap-side", "H(K|W1,W3)", "=", "0"),
        ("key-pair-joint-pinned", "H(K,W4)", "=", str(c)),
        ("key-determined-by-relay", "H(K|W4)", "=", "0"),
        ("relay-determined-by-key", "H(W4|K)", "=", "0"),
    ]
    obligations = [
        Obligation(name="source-sink-min-cut", kind="min-cut", source="s", sink="t", value=str(d)),
        Obligation(name="key-path-min-cut", kind="min-cut", source="a", sink="b", value=str(2 * c)),
    ]
    for name, expr, rel, value in chain:
        obligations.append(
            Obligation(
                name=name,
                kind="chain-claim",
                subnetwork=None,
                expression=expr,
                relation=rel,
                value=value,
            )
        )
    if 2 * c != c:
        # Probe flagging that the joint key entropy is c, not 2c: the
        # doubled target is refuted by the same LP.
        obligations.append(
            Obligation(
                name="key-pair-doubled-target-refuted",
                kind="chain-claim",
                subnetwork=None,
                expression="H(K,W4)",
                relation="=",
                value=str(2 * c),
                expected="contradicted",
            )
        )
    notes = (
        "The two-hop key path realizes key transport from the splitting "
        "relay to the merging relay; the relayed copy is the W4 role.",
        "Cuts {W1,W2} and {W2,W5} both carry exactly the source rate d.",
        "Randomness is permitted, not forced: a deterministic code may "
        "relay the masked stream's content along the key path (the tapped "
        "channel then collapses to a constant), and every forced equality "
        "above still holds for it.",
    )
    return SecureGadget(problem, ReconstructionContract(tuple(obligations), notes), c, d)


def otp_code(c: Union[Fraction, int, str], d: Union[Fraction, int, str]) -> NetworkCode:
    """One-time-pad witness code for the secure network.

    Regularity: 2**c and 2**d must be integers.  The source splits into a
    c-bit half (masked by a fresh uniform key on the tapped channel) and
    a (d-c)-bit half sent in the clear; the sink unmasks with the relayed
    key.
    """
    gadget = build_secure(c, d)
    c = gadget.c
    d = gadget.d
    if c.denominator != 1 or d.denominator != 1:
        raise ValueError("regularity violated: 2^c and 2^d must be integers")
    C = 2 ** int(c)
    D = 2 ** int(d)
    lo = D // C
    builder = CodeBuilder(gadget.problem)
    builder.source("X", D)
    builder.randomness("a", C)
    builder.edge("W1", C, lambda v: v["X"] // lo)
    builder.edge("W2", lo, lambda v: v["X"] % lo)
    builder.edge("W3", C, lambda v: (v["W1"] + v["V"]) % C)
    builder.edge("K", C, lambda v: v["V"])
    builder.edge("W4", C, lambda v: v["K"])
    builder.edge("W5", C, lambda v: (v["W3"] - v["W4"]) % C)
    return builder.build()


# ----------------------------------------------------------------------
# adhesion: one secure copy per (session, sink) of an inner multicast


@dataclass(frozen=True)
class AdheredGadget:
    problem: NetworkProblem
    contract: ReconstructionContract
    inner: NetworkProblem
    copies: tuple[tuple[str, str], ...]  # (session, sink)
    key_edges: Mapping[str, str]
    copy_sessions: Mapping[tuple[str, str], str]


def adhere(inner: NetworkProblem) -> AdheredGadget:
    """Wrap a multicast problem into an equivalent secure problem.

    Each inner session s of rate r and each of its sinks d gets one copy
    of the secure network with c = r and source rate 2r, except that the
    key path is replaced: one shared node per session emits the key into
    the inner network at the session's origin, and each inner sink feeds
    what it decodes into its copy's unmasking relay.  Copies of one
    session share the key; each copy's masked channel is tapped
    separately.
    """
    errors = validate(inner)
    if errors:
        raise ValueError("invalid inner problem: " + "; ".join(errors))
    if inner.wiretaps.taps:
        raise ValueError("the inner problem must have no wiretaps")
    nodes = list(inner.network.nodes)
    edges = list(inner.network.edges)
    sessions: list[Session] = []
    taps: list[Wiretap] = []
    randomness: list[str] = []
    copies: list[tuple[str, str]] = []
    key_edges: dict[str, str] = {}
    copy_sessions: dict[tuple[str, str], str] = {}
    for s in sorted(inner.requirement.sessions, key=lambda s: s.id):
        r = s.rate
        enc = f"enc[{s.id}]"
        if enc in nodes:
            raise ValueError(f"node name collision at {enc!r}")
        nodes.append(enc)
        randomness.append(enc)
        key_edges[s.id] = f"K[{s.id}]"
        edges.append(Edge(f"K[{s.id}]", enc, s.origin, Capacity(r)))
        for d in sorted(s.sinks):
            tag = f"{s.id}.{d}"
            src, dec, snk = f"src[{tag}]", f"dec[{tag}]", f"snk[{tag}]"
            for name in (src, dec, snk):
                if name in nodes:
                    raise ValueError(f"node name collision at {name!r}")
                nodes.append(name)
            sid = f"X[{tag}]"
            sessions.append(Session(sid, 2 * r, src, (snk,)))
            copies.append((s.id, d))
            copy_sessions[(s.id, d)] = sid
            edges.append(Edge(f"W1[{tag}]", src, enc, Capacity(r)))
            edges.append(Edge(f"W2[{tag}]", src, snk, Capacity(r)))
            edges.append(Edge(f"W3[{tag}]", enc, dec, Capacity(r)))
            edges.append(Edge(f"W4[{tag}]", d, dec, Capacity(r)))
            edges.append(Edge(f"W5[{tag}]", dec, snk, Capacity(r)))
            taps.append(Wiretap((sid,), (f"W3[{tag}]",)))
    problem = NetworkProblem(
        network=Network(tuple(nodes), tuple(edges)),
        requirement=ConnectionRequirement(tuple(sessions)),
        wiretaps=WiretapPattern(tuple(taps)),
        randomness_nodes=tuple(randomness),
    )
    errors = validate(problem)
    if errors:
        raise AssertionError("construction bug: " + "; ".join(errors))
    obligations = []
    for s in sorted(inner.requirement.sessions, key=lambda s: s.id):
        for d in sorted(s.sinks):
            tag = f"{s.id}.{d}"
            obligations.append(
                Obligation(
                    name=f"shell-cut[{tag}]",
                    kind="min-cut",
                    source=f"src[{tag}]",
                    sink=f"enc[{s.id}]",
                    value=str(s.rate),
                )
            )
            obligations.append(
                Obligation(
                    name=f"unmask-cut[{tag}]",
                    kind="min-cut",
                    source=f"dec[{tag}]",
                    sink=f"snk[{tag}]",
                    value=str(s.rate),
                )
            )
    notes = (
        "Admissible exactly when the inner multicast is admissible: keys "
        "must traverse the inner network from each session origin to every "
        "sink at the session rate.",
        "One copy per (session, sink) pair; copies of a session share the "
        "key stream, and each masked channel is tapped on its own.",
    )
    return AdheredGadget(
        problem=problem,
        contract=ReconstructionContract(tuple(obligations), notes),
        inner=inner,
        copies=tuple(copies),
        key_edges=key_edges,
        copy_sessions=copy_sessions,
    )


def compose_adhered_code(gadget: AdheredGadget, inner_code: NetworkCode) -> NetworkCode:
    """Compose an inner multicast code with per-copy one-time pads.

    The inner code must be deterministic, transport each session at
    exactly its minimal alphabet 2**rate (integer rates), and be given
    for the inner problem itself; its sessions become the key streams.
    """
    inner = gadget.inner
    if inner_code.problem != inner:
        raise ValueError("inner code was built for a different problem")
    if inner_code.randomness:
        raise ValueError("inner code must be deterministic")
    rates = {s.id: s.rate for s in inner.requirement.sessions}
    key_size: dict[str, int] = {}
    for sid, r in rates.items():
        if r.denominator != 1:
            raise ValueError("composition needs integer session rates")
        size = 2 ** int(r)
        if inner_code.source_alphabets[sid] != size:
            raise ValueError(f"inner code must carry {sid} on exactly {size} symbols")
        key_size[sid] = size
    # Decode tables: inner sink inputs -> session value, from the inner code.
    from entroflow.codes import evaluate as eval_code, _sink_input_names

    inner_sessions = inner_code.session_order()
    decode: dict[tuple[str, str], dict[tuple[int, ...], int]] = {}
    for s in inner.requirement.sessions:
        for d in s.sinks:
            decode[(s.id, d)] = {}
    for combo in itertools.product(
        *(range(inner_code.source_alphabets[s]) for s in inner_sessions)
    ):
        values = eval_code(inner_code, combo)
        values.update(zip(inner_sessions, combo))
        for (sid, d), table in decode.items():
            givens = _sink_input_names(inner, d)
            key = tuple(values[g] for g in givens)
            table[key] = values[sid]
    problem = gadget.problem
    net = problem.network
    builder = CodeBuilder(problem)
    for (sid, d), xsid in gadget.copy_sessions.items():
        builder.source(xsid, key_size[sid] ** 2)
    for sid in rates:
        builder.randomness(f"enc[{sid}]", key_size[sid])
    # Copy shells.
    for (sid, d), xsid in gadget.copy_sessions.items():
        tag = f"{sid}.{d}"
        C = key_size[sid]
        builder.edge(f"W1[{tag}]", C, lambda v, x=xsid, C=C: v[x] // C)
        builder.edge(f"W2[{tag}]", C, lambda v, x=xsid, C=C: v[x] % C)
        builder.edge(
            f"W3[{tag}]", C, lambda v, tag=tag, C=C: (v[f"W1[{tag}]"] + v["V"]) % C
        )
        builder.edge(
            f"W5[{tag}]",
            C,
            lambda v, tag=tag, C=C: (v[f"W3[{tag}]"] - v[f"W4[{tag}]"]) % C,
        )
    for sid in rates:
        builder.edge(f"K[{sid}]", key_size[sid], lambda v: v["V"])
    # Inner edges reuse the inner encoders with sessions read off key edges.
    for e in inner.network.edges:
        if e.forwards is not None:
            continue
        enc = inner_code.encoders[e.id]

        def run_inner(v, enc=enc, tail=e.tail):
            args = []
            for kind, name in enc.inputs:
                if kind == "session":
                    args.append(v[gadget.key_edges[name]])
                else:
                    args.append(v[name])
            return enc.apply(args)

        builder.edge(e.id, inner_code.edge_alphabets[e.id], run_inner)
    # Unmask relays read the inner sink's decode.  The decode tables are
    # keyed by message values; translate them to the in-edge (or key-edge)
    # inputs that carry those messages at the adhered node.
    for (sid, d), xsid in gadget.copy_sessions.items():
        tag = f"{sid}.{d}"
        givens = _sink_input_names(inner, d)
        table = decode[(sid, d)]
        carrier: dict[str, str] = {}
        for e in net.in_edges(d):
            if e.id.startswith("K["):
                continue
            carrier.setdefault(net.message_of(e.id), e.id)
        keys = []
        for g in givens:
            if g in carrier:
                keys.append(carrier[g])
            else:
                keys.append(gadget.key_edges[g])  # a session decoded at its origin

        def w4(v, keys=tuple(keys), table=table):
            return table[tuple(v[k] for k in keys)]

        builder.edge(f"W4[{tag}]", key_size[sid], w4)
    return builder.build()


# ----------------------------------------------------------------------
# quasi-uniform library


def quasi_uniform_library() -> dict[str, JointDistribution]:
    """Named quasi-uniform distributions used across the test suite."""
    lib: dict[str, JointDistribution] = {}
    lib["independent-bits"] = JointDistribution.uniform_over(
        [("V1", 2), ("V2", 2)], [(a, b) for a in range(2) for b in range(2)]
    )
    lib["duplicated-bit"] = JointDistribution.uniform_over(
        [("V1", 2), ("V2", 2)], [(a, a) for a in range(2)]
    )
    lib["bit-and-pair"] = JointDistribution.uniform_over(
        [("V1", 2), ("V2", 4)],
        [(a, 2 * a + b) for a in range(2) for b in range(2)],
    )
    lib["xor-triple"] = JointDistribution.uniform_over(
        [("V1", 2), ("V2", 2), ("V3", 2)],
        [(a, b, a ^ b) for a in range(2) for b in range(2)],
    )
    lib["three-independent-bits"] = JointDistribution.uniform_over(
        [("V1", 2), ("V2", 2), ("V3", 2)],
        [(a, b, c) for a in range(2) for b in range(2) for c in range(2)],
    )
    lib["duplicated-plus-independent"] = JointDistribution.uniform_over(
        [("V1", 2), ("V2", 2), ("V3", 2)],
        [(a, a, b) for a in range(2) for b in range(2)],
    )
    return lib
