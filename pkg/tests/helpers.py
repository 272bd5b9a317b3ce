"""Shared generators and brute-force oracles for the test suite."""

from __future__ import annotations

import random

from deon import formula as F
from deon import lam as L
from deon import semantics as S

P, Q, R = F.Atom("p"), F.Atom("q"), F.Atom("r")
SIG = F.Signature({"p": 0, "q": 0, "r": 0, "P1": 1, "Q1": 1},
                  frozenset({"c0", "c1", "c2"}))


def gen_formula(rng: random.Random, logic: str, depth: int,
                quantifiers: bool = False, scope: tuple[str, ...] = ()) -> F.Formula:
    """Random closed formula over p, q, r (and P1/Q1 with quantifiers)."""
    leaf_roll = rng.random()
    if depth == 0 or leaf_roll < 0.25:
        if quantifiers and scope and rng.random() < 0.6:
            pred = rng.choice(["P1", "Q1"])
            term: F.Term = F.Var(rng.choice(scope))
            return F.Atom(pred, (term,))
        if quantifiers and rng.random() < 0.15:
            return F.Atom(rng.choice(["P1", "Q1"]), (F.Const("c0"),))
        return rng.choice([P, Q, R])
    roll = rng.random()
    if roll < 0.2:
        return F.Not(gen_formula(rng, logic, depth - 1, quantifiers, scope))
    if roll < 0.45:
        ctor = rng.choice([F.And, F.Or, F.Implies, F.Iff])
        return ctor(gen_formula(rng, logic, depth - 1, quantifiers, scope),
                    gen_formula(rng, logic, depth - 1, quantifiers, scope))
    if quantifiers and roll < 0.6 and len(scope) < 2:
        var = f"x{len(scope)}"
        ctor = rng.choice([F.Forall, F.Exists])
        return ctor(var, gen_formula(rng, logic, depth - 1, quantifiers, scope + (var,)))
    if logic == "sdl":
        ctor = rng.choice([F.ObligM, F.Box, F.Dia, F.Perm, F.Forb])
        return ctor(gen_formula(rng, logic, depth - 1, quantifiers, scope))
    if roll < 0.8:
        return F.Oblig(gen_formula(rng, logic, depth - 1, quantifiers, scope),
                       gen_formula(rng, logic, depth - 1, quantifiers, scope))
    if roll < 0.85:
        # monadic obligation: e-mode ASTs carry the elaborated dyadic form
        return F.Oblig(gen_formula(rng, logic, depth - 1, quantifiers, scope), F.TOP)
    ctor = rng.choice([F.Box, F.Dia, F.Perm, F.Forb])
    return ctor(gen_formula(rng, logic, depth - 1, quantifiers, scope))


def gen_model(rng: random.Random, logic: str, max_worlds: int = 4,
              max_indivs: int = 3):
    """Random finite model whose valuation covers the helpers signature."""
    n = rng.randint(1, max_worlds)
    domain = ["c0", "c1", "c2"][: rng.randint(1, max_indivs)]
    pairs = [(s, t) for s in range(n) for t in range(n) if rng.random() < 0.5]
    if logic == "sdl":
        for s in range(n):
            if not any(x == s for x, _ in pairs):
                pairs.append((s, rng.randrange(n)))
    atoms = [("p", ()), ("q", ()), ("r", ())]
    atoms += [(pred, (c,)) for pred in ("P1", "Q1") for c in domain]
    valuation = {a: [w for w in range(n) if rng.random() < 0.5] for a in atoms}
    cls = S.KripkeModel if logic == "sdl" else S.PreferenceModel
    return cls(n, pairs, valuation, domain)


def brute_sat(logic: str, globals_, locals_, max_n: int = 3) -> bool:
    """Enumeration oracle: is there a model of at most max_n worlds making
    every global valid and each local true somewhere?"""
    atoms = sorted({S.atom_key(a) for f in list(globals_) + list(locals_)
                    for a in F.atoms_of(f)})
    iterator = S.iter_preference_models if logic == "e" else S.iter_serial_kripke_models
    for n in range(1, max_n + 1):
        for m in iterator(n, atoms):
            ev = S.Evaluator(m, logic)
            if all(ev.valid(f) for f in globals_) and \
                    all(ev.mask(f) != 0 for f in locals_):
                return True
    return False


def brute_valid_everywhere(logic: str, f: F.Formula, max_n: int = 3) -> bool:
    """Enumeration oracle for validity over all models up to max_n worlds."""
    return not brute_sat(logic, [], [F.Not(f)], max_n)


_TYPES = [L.O, L.I, L.TAU, L.Arrow(L.I, L.I), L.Arrow(L.TAU, L.O)]


def gen_typed_term(rng: random.Random, ty: L.Ty, env: tuple[tuple[str, L.Ty], ...] = (),
                   depth: int = 4) -> L.LTerm:
    """Random well-typed term of the requested type, redex-rich."""
    candidates = [name for name, t in env if t == ty]
    roll = rng.random()
    if depth == 0 or (roll < 0.25 and candidates):
        if candidates:
            return L.Var(rng.choice(candidates), ty)
        return L.Const(f"k{abs(hash(str(ty))) % 7}", ty)
    if isinstance(ty, L.Arrow) and roll < 0.6:
        var = f"x{len(env)}"
        body = gen_typed_term(rng, ty.dst, env + ((var, ty.src),), depth - 1)
        return L.Abs(var, ty.src, body)
    if roll < 0.85:
        arg_ty = rng.choice(_TYPES)
        fun = gen_typed_term(rng, L.Arrow(arg_ty, ty), env, depth - 1)
        arg = gen_typed_term(rng, arg_ty, env, depth - 1)
        return L.App(fun, arg)
    if candidates:
        return L.Var(rng.choice(candidates), ty)
    return L.Const(f"k{abs(hash(str(ty))) % 7}", ty)
