"""Acceptance gate: one test per criterion, one printed verdict line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the verdict lines;
each test also fails loudly if its criterion does not hold. Sweep sizes
are fixed (not scaled down) so a pass here is the full result.
"""

import hashlib
import itertools
import math
import random

import pytest

from mpjlab.adversary import (
    build_fooling_inputs,
    find_crossed_cell,
    half_weight_strings,
    is_crossing,
    max_message_bits,
    verify_fooling,
)
from mpjlab.bucketing import (
    bucket_index,
    bucket_members,
    bucket_width_plan,
    bucketing_protocol,
    iterated_log,
)
from mpjlab.core import (
    BitVector,
    LayerFunction,
    MpjHatInstance,
    MpjInstance,
    Variant,
    chain_layers,
    enumerate_instances,
    eval_instance,
    eval_mpj_hat,
    sample_instances,
)
from mpjlab.covers import (
    build_d_cover,
    build_sd_cover,
    verify_d_cover,
    verify_sd_cover,
)
from mpjlab.families import collapsing_family
from mpjlab.jump import (
    build_sj_chain,
    index_protocol,
    mpj3_sublinear,
    mpjk_sublinear,
    naive_perm_protocol,
)
from mpjlab.registry import build_protocol
from mpjlab.sim import Message, ViewKind, make_view, run, verify


def _criterion(cid, label, ok, details):
    print(f"\nACCEPTANCE {cid} {label}: {'PASS' if ok else 'FAIL'} ({details})")
    assert ok, f"{cid} {label}: {details}"


# ----- shared sublinear sweeps (criteria 1, 2, 3) ---------------------------


def _sweep_sublinear(protocol, instances, *, n, k, d):
    """Run every instance; tally wrong answers, cost-bound breaks, bad framing."""
    m = n  # plug-in subprotocol message size (naive: m = n)
    bound = 2 * (k - 2) * d * m + n / d ** (k - 2)
    checked = failures = cost_violations = framing_violations = 0
    for inst in instances:
        t = run(protocol, inst)
        checked += 1
        if t.output != eval_instance(inst):
            failures += 1
        if t.prefix_cost > bound:
            cost_violations += 1
        chain = build_sj_chain(inst.middles, d)
        opening_ok = t.per_player_bits[0] == (k - 2) * d * m + len(chain.level(k - 1))
        replies_ok = t.per_player_bits[1:-1] == (d * m,) * (k - 2)
        if not (opening_ok and replies_ok and t.per_player_bits[-1] == 1):
            framing_violations += 1
    return {
        "checked": checked,
        "failures": failures,
        "cost_violations": cost_violations,
        "framing_violations": framing_violations,
    }


@pytest.fixture(scope="module")
def sublinear_results():
    results = {}
    for d in (1, 2, 3):
        proto = mpj3_sublinear(naive_perm_protocol(3), d)
        results[("mpj3", 3, d, "exhaustive")] = _sweep_sublinear(
            proto, enumerate_instances(3, 3, Variant.MPJ), n=3, k=3, d=d
        )
    seeded = list(sample_instances(8, 3, Variant.MPJ, count=10_000, seed=80))
    for d in (1, 2, 4):
        proto = mpj3_sublinear(naive_perm_protocol(8), d)
        results[("mpj3", 8, d, "seeded")] = _sweep_sublinear(
            proto, seeded, n=8, k=3, d=d
        )
    proto = mpjk_sublinear(naive_perm_protocol(3), 2, 4)
    results[("mpjk", 3, 2, "exhaustive")] = _sweep_sublinear(
        proto, enumerate_instances(3, 4, Variant.MPJ), n=3, k=4, d=2
    )
    return results


def test_c1_three_player_sublinear_correctness(sublinear_results):
    rows = [v for key, v in sublinear_results.items() if key[0] == "mpj3"]
    checked = sum(r["checked"] for r in rows)
    failures = sum(r["failures"] for r in rows)
    exhaustive_ok = all(
        sublinear_results[("mpj3", 3, d, "exhaustive")]["checked"] == 648
        for d in (1, 2, 3)
    )
    seeded_ok = all(
        sublinear_results[("mpj3", 8, d, "seeded")]["checked"] == 10_000
        for d in (1, 2, 4)
    )
    _criterion(
        "C1",
        "three-player sublinear protocol is never wrong",
        failures == 0 and exhaustive_ok and seeded_ok,
        f"{checked} runs over d in {{1,2,3}} exhaustive at n=3 plus d in "
        f"{{1,2,4}} on 10^4 seeded instances at n=8; {failures} failures",
    )


def test_c2_k_player_sublinear_correctness(sublinear_results):
    row = sublinear_results[("mpjk", 3, 2, "exhaustive")]
    _criterion(
        "C2",
        "k-player sublinear protocol is never wrong",
        row["failures"] == 0 and row["checked"] == 17_496,
        f"all {row['checked']} four-player instances at n=3 with d=2; "
        f"{row['failures']} failures",
    )


def test_c3_sublinear_cost_accounting(sublinear_results):
    cost = sum(r["cost_violations"] for r in sublinear_results.values())
    framing = sum(r["framing_violations"] for r in sublinear_results.values())
    checked = sum(r["checked"] for r in sublinear_results.values())
    _criterion(
        "C3",
        "sublinear costs stay under 2(k-2)dm + n/d^(k-2) with exact framing",
        cost == 0 and framing == 0,
        f"{checked} transcripts: {cost} over the bound, {framing} with part "
        f"sizes differing from d*m per opening and one raw bit per survivor",
    )


# ----- criterion 4: covers ---------------------------------------------------


def test_c4_cover_construction_exhaustive():
    built = violations = 0
    for values in itertools.product(range(1, 5), repeat=4):
        f = LayerFunction(4, values)
        for d in (1, 2, 3, 4):
            cover = build_d_cover(f, d)
            ok, _ = verify_d_cover(cover, f, d)
            built += 1
            if not ok or len(cover.perms) != d:
                violations += 1
    scopes = [
        frozenset(c)
        for size in range(4)
        for c in itertools.combinations((1, 2, 3), size)
    ]
    for values in itertools.product(range(1, 4), repeat=3):
        f = LayerFunction(3, values)
        for scope in scopes:
            for d in (1, 2, 3):
                cover = build_sd_cover(f, scope, d)
                ok, _ = verify_sd_cover(cover, f, scope, d)
                built += 1
                if not ok or len(cover.perms) != d:
                    violations += 1
    _criterion(
        "C4",
        "every cover verifies with exactly d permutations",
        violations == 0 and built == 256 * 4 + 27 * 8 * 3,
        f"{built} covers: all 256 functions at n=4 for d<=4, plus all 27 "
        f"functions x 8 scopes x d<=3 at n=3; {violations} violations",
    )


# ----- criterion 5: bucketing ------------------------------------------------


def _survivor_oracle(inst, plan):
    answer = eval_mpj_hat(inst)
    sets = {}
    for j in range(2, plan.terminal + 1):
        suffix = chain_layers(inst.layers[j - 1 :], inst.n)
        prev = plan.width(j - 1)
        members = set(
            bucket_members(prev, inst.n, bucket_index(prev, inst.n, answer))
        )
        sets[j] = tuple(s for s in range(1, inst.n + 1) if suffix(s) in members)
    return sets


def _sweep_bucketing(n, k, instances):
    plan = bucket_width_plan(n, k)
    proto = bucketing_protocol(n, k)
    first_width = n * max(1, math.ceil(iterated_log(n, k - 1)))
    checked = failures = size_violations = 0
    for inst in instances:
        t = run(proto, inst)
        checked += 1
        if t.output != eval_mpj_hat(inst):
            failures += 1
        sizes_ok = t.per_player_bits[0] == first_width
        sets = _survivor_oracle(inst, plan)
        for j in range(2, plan.terminal + 1):
            cap = -(-n // (2 ** plan.width(j - 1)))
            sizes_ok = (
                sizes_ok
                and t.per_player_bits[j - 1] == n + len(sets[j]) * plan.width(j)
                and len(sets[j]) <= cap
            )
        if not sizes_ok:
            size_violations += 1
    return checked, failures, size_violations


def test_c5_bucketing_correctness_and_sizes():
    checked = failures = sizes = 0
    c, f, s = _sweep_bucketing(
        4, 3, enumerate_instances(4, 3, Variant.MPJ_HAT, (True, True))
    )
    exhaustive_count = c
    checked, failures, sizes = checked + c, failures + f, sizes + s
    for k in (3, 4, 5):
        insts = sample_instances(
            16, k, Variant.MPJ_HAT, (True,) * (k - 1), count=10_000, seed=160 + k
        )
        c, f, s = _sweep_bucketing(16, k, insts)
        checked, failures, sizes = checked + c, failures + f, sizes + s
    _criterion(
        "C5",
        "bucketing is never wrong and every announcement has its exact size",
        failures == 0 and sizes == 0 and exhaustive_count == 2304,
        f"{checked} runs (all 2304 at n=4, plus 10^4 seeded per k in {{3,4,5}} "
        f"at n=16): {failures} failures, {sizes} size mismatches against the "
        f"independent survivor oracle",
    )


# ----- criterion 6: crossing machinery ---------------------------------------


def test_c6_crossing_pairs_and_counting():
    pair_checks = pair_violations = 0
    for n in (4, 6, 8):
        for va, vb in itertools.combinations(half_weight_strings(n), 2):
            pair_checks += 1
            crossed = is_crossing(va, vb)
            if (vb != va.complement()) != crossed:
                pair_violations += 1

    bound_ok = all(
        math.comb(n, n // 2) > 2**n / (2 * math.sqrt(n)) for n in range(2, 65, 2)
    )

    searches = search_failures = 0
    for n in (8, 10, 12):
        t = math.floor(max_message_bits(n))
        for fn_seed in range(100):
            def message_fn(y, n=n, fn_seed=fn_seed, t=t):
                digest = hashlib.sha256(f"{n}|{fn_seed}|{y.to01()}".encode()).digest()
                return Message(
                    tuple((digest[b // 8] >> (b % 8)) & 1 for b in range(t))
                )

            searches += 1
            try:
                msg, pair = find_crossed_cell(message_fn, n, t)
            except Exception:
                search_failures += 1
                continue
            if not (
                pair.crossing
                and message_fn(pair.x) == msg
                and message_fn(pair.xp) == msg
            ):
                search_failures += 1

    ok = pair_violations == 0 and bound_ok and search_failures == 0
    _criterion(
        "C6",
        "crossing pairs exist exactly as counted",
        ok,
        f"{pair_checks} half-weight pairs over n in {{4,6,8}} cross iff distinct "
        f"and non-complementary ({pair_violations} exceptions); central binomial "
        f"exceeds 2^n/(2 sqrt n) for all even n<=64 ({bound_ok}); "
        f"{searches} random message partitions all yielded a crossed class "
        f"({search_failures} failed)",
    )


# ----- criterion 7: fooling sweep --------------------------------------------


def test_c7_fooling_every_weak_collapsing_protocol():
    attacked = fooled = 0
    for n, k in itertools.product((8, 10), (3, 4)):
        for proto in collapsing_family(n, k, 13, seed=10 * n + k):
            attacked += 1
            pair = build_fooling_inputs(proto)
            report = verify_fooling(proto, pair.inst0, pair.inst1)
            prefix_match = (
                run(proto, pair.inst0).messages[:-1] == pair.prefix_messages
                and run(proto, pair.inst1).messages[:-1] == pair.prefix_messages
            )
            if report.fooled and prefix_match:
                fooled += 1
    _criterion(
        "C7",
        "every short-message collapsing target is fooled",
        attacked >= 50 and fooled == attacked,
        f"{fooled}/{attacked} protocols (13 per (n,k) in {{8,10}}x{{3,4}}) "
        f"fooled with replay-verified identical non-final transcripts",
    )


# ----- criterion 8: index cost -----------------------------------------------


def test_c8_index_cost_is_exactly_n():
    results = []
    for n in (4, 8):
        report = verify(index_protocol(n), enumerate_instances(n, 2, Variant.MPJ))
        results.append((n, report))
    for n in (16, 32):
        insts = sample_instances(n, 2, Variant.MPJ, count=500, seed=n)
        results.append((n, verify(index_protocol(n), insts)))
    ok = all(
        r.worst_prefix_cost == n and r.worst_cost == n + 1 and r.ok
        for n, r in results
    )
    detail = ", ".join(f"n={n}: {r.worst_prefix_cost}+1" for n, r in results)
    _criterion(
        "C8",
        "index sends exactly n bits before the output",
        ok,
        detail + "; exhaustive for n<=8, 500 samples beyond",
    )


# ----- criterion 9: view isolation fuzz --------------------------------------


def _with_boolean(inst, **changes):
    return MpjInstance(
        inst.n,
        inst.k,
        changes.get("i", inst.i),
        changes.get("middles", inst.middles),
        changes.get("x", inst.x),
    )


def _with_hat(inst, layers):
    return MpjHatInstance(inst.n, inst.k, inst.i, layers, inst.perm_mask)


def _different_layer(f, rng, keep_permutation):
    n = f.n
    values = list(f.values)
    if keep_permutation:
        a, b = rng.sample(range(n), 2)
        values[a], values[b] = values[b], values[a]
    else:
        pos = rng.randrange(n)
        values[pos] = 1 + (values[pos] % n)
    return LayerFunction(n, tuple(values))


def _mutate_own_layer(inst, j, rng):
    """An instance differing from inst only in the layer player j owns."""
    n, k = inst.n, inst.k
    if j == 1:
        return _with_boolean(inst, i=1 + (inst.i % n)) if isinstance(
            inst, MpjInstance
        ) else MpjHatInstance(n, k, 1 + (inst.i % n), inst.layers, inst.perm_mask)
    if isinstance(inst, MpjInstance):
        if j < k:
            mids = list(inst.middles)
            mids[j - 2] = _different_layer(mids[j - 2], rng, keep_permutation=False)
            return _with_boolean(inst, middles=tuple(mids))
        flip = rng.randrange(n)
        bits = list(inst.x.bits)
        bits[flip] ^= 1
        return _with_boolean(inst, x=BitVector(n, tuple(bits)))
    layers = list(inst.layers)
    layers[j - 2] = _different_layer(
        layers[j - 2], rng, keep_permutation=inst.perm_mask[j - 2]
    )
    return _with_hat(inst, tuple(layers))


def _refactor_suffix(inst, j, rng):
    """Rewrite the two layers after layer j against a random permutation,
    keeping their composition; None when fewer than two layers follow."""
    n, k = inst.n, inst.k
    order = list(range(1, n + 1))
    rng.shuffle(order)
    rho = LayerFunction(n, tuple(order))
    rho_inv = rho.inverse()
    if isinstance(inst, MpjInstance):
        if j <= k - 3:
            mids = list(inst.middles)
            mids[j - 1] = rho.after(mids[j - 1])
            mids[j] = mids[j].after(rho_inv)
            return _with_boolean(inst, middles=tuple(mids))
        if j == k - 2:
            mids = list(inst.middles)
            mids[j - 1] = rho.after(mids[j - 1])
            return _with_boolean(
                inst, middles=tuple(mids), x=inst.x.through(rho_inv)
            )
        return None
    if j <= k - 2:
        layers = list(inst.layers)
        layers[j - 1] = rho.after(layers[j - 1])
        layers[j] = layers[j].after(rho_inv)
        return _with_hat(inst, tuple(layers))
    return None


def _fuzz_protocol(built, n, trials, seed):
    handle = built.handle
    rng = random.Random(seed)
    instances = list(
        sample_instances(
            n, handle.k, built.variant, built.perm_mask, count=trials, seed=seed
        )
    )
    performed = violations = 0
    for idx, inst in enumerate(instances):
        j = (idx % handle.k) + 1
        prefix = run(handle, inst).messages[: j - 1]
        base_view = make_view(inst, j, handle.view_kind, prefix)
        mutants = [_mutate_own_layer(inst, j, rng)]
        if handle.view_kind is ViewKind.COLLAPSING:
            refactored = _refactor_suffix(inst, j, rng)
            if refactored is not None:
                mutants.append(refactored)
        for mutant in mutants:
            performed += 1
            mutant_view = make_view(mutant, j, handle.view_kind, prefix)
            same_view = mutant_view == base_view
            same_message = handle.players[j - 1](mutant_view) == handle.players[
                j - 1
            ](base_view)
            if not (same_view and same_message):
                violations += 1
    return performed, violations


def test_c9_view_isolation_fuzz():
    targets = [
        ("index", dict(n=8), 8),
        ("mpj3-sublinear", dict(n=8, d=2), 8),
        ("mpjk-sublinear", dict(n=8, k=4, d=2), 8),
        ("bucketing", dict(n=8, k=4), 8),
        ("bucketing-doubling", dict(n=16, k=5), 16),
        ("constant", dict(n=8, k=3), 8),
        ("truncate3", dict(n=8, k=3), 8),
        ("parity3", dict(n=8, k=3), 8),
        ("hash3", dict(n=8, k=3), 8),
    ]
    total = violations = 0
    per_protocol = []
    for name, kwargs, n in targets:
        built = build_protocol(name, **kwargs)
        seed = int.from_bytes(hashlib.sha256(name.encode()).digest()[:2], "big")
        performed, bad = _fuzz_protocol(built, n, trials=1000, seed=seed)
        total += performed
        violations += bad
        per_protocol.append(f"{name}:{performed}")
    _criterion(
        "C9",
        "messages never move when invisible data is mutated",
        violations == 0,
        f"{total} mutations across 1000 fuzzed instances per protocol "
        f"({', '.join(per_protocol)}); {violations} message changes",
    )
