"""Regenerate the JSON task fixtures under tests/fixtures/.

Run from the repository root: ``python3 tools/make_fixtures.py``. The output
is deterministic, so a clean checkout followed by this script leaves git with
no changes.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "tests" / "fixtures"


class Task:
    def __init__(self, name: str, agents: list[str]):
        self.name = name
        self.agents = agents
        self.facts: list[str] = []
        self.actions: list[dict] = []
        self.init: list[str] = []
        self.goal: list[str] = []
        self.public: list[str] = []

    def _see(self, *groups) -> None:
        for g in groups:
            for f in g:
                if f not in self.facts:
                    self.facts.append(f)

    def act(self, agent, name, pre=(), add=(), dele=(), cost=1):
        pre, add, dele = list(pre), list(add), list(dele)
        self._see(pre, add, dele)
        self.actions.append(
            {"agent": agent, "name": name, "pre": pre, "add": add, "del": dele, "cost": cost}
        )
        return self

    def start(self, *facts):
        self._see(facts)
        self.init.extend(facts)
        return self

    def want(self, *facts):
        self._see(facts)
        self.goal.extend(facts)
        return self

    def doc(self) -> dict:
        d = {
            "name": self.name,
            "agents": self.agents,
            "facts": sorted(self.facts),
            "init": sorted(self.init),
            "goal": sorted(self.goal),
            "actions": self.actions,
        }
        if self.public:
            d["public"] = sorted(self.public)
        return d


# ---------------------------------------------------------------- mini-suite


def trivial() -> Task:
    t = Task("trivial", ["solo"])
    t.act("solo", "light", ["dark"], ["lit"], ["dark"])
    return t.start("dark", "done").want("done")


def chain4() -> Task:
    t = Task("chain4", ["solo"])
    for i in range(4):
        t.act("solo", f"step{i}", [f"p{i}"], [f"p{i + 1}"], [f"p{i}"])
    return t.start("p0").want("p4")


def chain3() -> Task:
    t = Task("chain3", ["solo"])
    t.act("solo", "a1", ["s"], ["u"])
    t.act("solo", "a2", ["u"], ["v"])
    t.act("solo", "a3", ["v"], ["w"])
    t.act("solo", "detour", ["s"], ["z"])
    return t.start("s").want("w")


def handoff() -> Task:
    t = Task("handoff", ["maker", "user"])
    t.act("maker", "warm-up", ["m-cold"], ["m-warm"], ["m-cold"])
    t.act("maker", "make-part", ["m-warm"], ["part"])
    t.act("user", "prepare", ["u-idle"], ["u-ready"], ["u-idle"])
    t.act("user", "assemble", ["u-ready", "part"], ["product"], ["part"])
    return t.start("m-cold", "u-idle").want("product")


def mbs_private() -> Task:
    """Two robots, private corridors, one private goal each, a key passed at a door."""
    t = Task("mbs_private", ["ra", "rb"])
    t.act("ra", "ra-move-1-2", ["ra-at-1"], ["ra-at-2"], ["ra-at-1"])
    t.act("ra", "ra-move-2-1", ["ra-at-2"], ["ra-at-1"], ["ra-at-2"])
    t.act("ra", "ra-move-2-3", ["ra-at-2"], ["ra-at-3"], ["ra-at-2"])
    t.act("ra", "ra-move-3-2", ["ra-at-3"], ["ra-at-2"], ["ra-at-3"])
    t.act("ra", "ra-move-1-3", ["ra-at-1"], ["ra-at-3"], ["ra-at-1"], cost=3)
    t.act("ra", "ra-take-key", ["ra-at-3", "key-in-vault"], ["ra-has-key"], ["key-in-vault"])
    t.act("ra", "ra-drop-key", ["ra-at-1", "ra-has-key"], ["key-at-door"], ["ra-has-key"])
    t.act("ra", "ra-lamp", ["ra-at-2"], ["ra-lamp-on"])
    t.act("rb", "rb-take-key", ["rb-at-1", "key-at-door"], ["rb-has-key"], ["key-at-door"])
    t.act("rb", "rb-move-1-2", ["rb-at-1"], ["rb-at-2"], ["rb-at-1"])
    t.act("rb", "rb-move-2-1", ["rb-at-2"], ["rb-at-1"], ["rb-at-2"])
    t.act("rb", "rb-open", ["rb-at-2", "rb-has-key"], ["rb-safe-open"])
    t.act("rb", "rb-report", ["rb-safe-open"], ["job-done"])
    t.start("ra-at-1", "rb-at-1", "key-in-vault")
    return t.want("job-done", "ra-lamp-on", "rb-safe-open")


def logistics(name: str, packages: list[tuple[str, str, str]], trucks=("t1", "t2"), plane="p") -> Task:
    """Two cities with an airport (a) and a depot (b) each; trucks stay in their city."""
    cities = {"t1": "c1", "t2": "c2"}
    agents = list(trucks) + ([plane] if plane else [])
    t = Task(name, agents)
    for tr in trucks:
        c = cities[tr]
        t.act(tr, f"drive-{tr}-{c}a-{c}b", [f"at-{tr}-{c}a"], [f"at-{tr}-{c}b"], [f"at-{tr}-{c}a"])
        t.act(tr, f"drive-{tr}-{c}b-{c}a", [f"at-{tr}-{c}b"], [f"at-{tr}-{c}a"], [f"at-{tr}-{c}b"])
    if plane:
        t.act(plane, f"fly-{plane}-c1a-c2a", [f"at-{plane}-c1a"], [f"at-{plane}-c2a"], [f"at-{plane}-c1a"])
        t.act(plane, f"fly-{plane}-c2a-c1a", [f"at-{plane}-c2a"], [f"at-{plane}-c1a"], [f"at-{plane}-c2a"])
    for pk, _, _ in packages:
        for tr in trucks:
            c = cities[tr]
            for loc in (f"{c}a", f"{c}b"):
                t.act(tr, f"load-{pk}-{tr}-{loc}", [f"at-{tr}-{loc}", f"at-{pk}-{loc}"], [f"in-{pk}-{tr}"], [f"at-{pk}-{loc}"])
                t.act(tr, f"unload-{pk}-{tr}-{loc}", [f"at-{tr}-{loc}", f"in-{pk}-{tr}"], [f"at-{pk}-{loc}"], [f"in-{pk}-{tr}"])
        if plane:
            for loc in ("c1a", "c2a"):
                t.act(plane, f"load-{pk}-{plane}-{loc}", [f"at-{plane}-{loc}", f"at-{pk}-{loc}"], [f"in-{pk}-{plane}"], [f"at-{pk}-{loc}"])
                t.act(plane, f"unload-{pk}-{plane}-{loc}", [f"at-{plane}-{loc}", f"in-{pk}-{plane}"], [f"at-{pk}-{loc}"], [f"in-{pk}-{plane}"])
    for tr in trucks:
        t.start(f"at-{tr}-{cities[tr]}a")
    if plane:
        t.start(f"at-{plane}-c1a")
    for pk, src, dst in packages:
        t.start(f"at-{pk}-{src}")
        t.want(f"at-{pk}-{dst}")
    return t


def logistics3_toy() -> Task:
    return logistics("logistics3_toy", [("pk1", "c1b", "c2b")])


def logistics2() -> Task:
    return logistics("logistics2", [("pk1", "c1b", "c2a")], trucks=("t1",))


def relay4() -> Task:
    t = Task("relay4", ["r0", "r1", "r2", "r3"])
    for i in range(4):
        t.act(f"r{i}", f"r{i}-wake", [f"r{i}-asleep"], [f"r{i}-awake"], [f"r{i}-asleep"])
    t.act("r0", "r0-pass", ["r0-awake", "baton-0"], ["baton-1"], ["baton-0"])
    t.act("r1", "r1-pass", ["r1-awake", "baton-1"], ["baton-2"], ["baton-1"])
    t.act("r2", "r2-pass", ["r2-awake", "baton-2"], ["baton-3"], ["baton-2"])
    t.act("r3", "r3-finish", ["r3-awake", "baton-3"], ["finished"], ["baton-3"])
    t.act("r1", "r1-fumble", ["baton-1"], ["baton-0"], ["baton-1"])
    t.start("baton-0", *[f"r{i}-asleep" for i in range(4)])
    return t.want("finished")


def witness() -> Task:
    """One agent reaches p and q one at a time; the other needs both at once."""
    t = Task("witness", ["a", "b"])
    t.act("a", "add-p", [], ["p"])
    t.act("a", "add-q", [], ["q"])
    t.act("b", "combine", ["p", "q"], ["g"])
    return t.want("g")


def rovers2() -> Task:
    t = Task("rovers2", ["rv1", "rv2"])
    for r in ("rv1", "rv2"):
        t.act(r, f"{r}-drive-base-site", [f"{r}-at-base"], [f"{r}-at-site"], [f"{r}-at-base"])
        t.act(r, f"{r}-drive-site-base", [f"{r}-at-site"], [f"{r}-at-base"], [f"{r}-at-site"])
        t.act(r, f"{r}-sample", [f"{r}-at-site", f"{r}-empty"], [f"{r}-full"], [f"{r}-empty"])
        t.act(r, f"{r}-send", [f"{r}-at-base", f"{r}-full", "channel-free"], [f"data-{r}"])
    return t.start("rv1-at-base", "rv2-at-base", "rv1-empty", "rv2-empty", "channel-free").want("data-rv1", "data-rv2")


def satellite3() -> Task:
    t = Task("satellite3", ["s1", "s2", "s3"])
    for s in ("s1", "s2", "s3"):
        t.act(s, f"{s}-power", [f"{s}-off"], [f"{s}-on"], [f"{s}-off"])
        t.act(s, f"{s}-turn", [f"{s}-on"], [f"{s}-pointed"])
        t.act(s, f"{s}-shoot", [f"{s}-pointed", "sky-clear"], [f"image-{s}"])
    t.act("s1", "s1-calibrate-sky", ["s1-on"], ["sky-clear"])
    return t.start("s1-off", "s2-off", "s3-off").want("image-s1", "image-s2", "image-s3")


def depot2() -> Task:
    t = Task("depot2", ["h1", "h2"])
    t.act("h1", "h1-lift", ["crate-at-p1", "h1-free"], ["h1-holding"], ["crate-at-p1", "h1-free"])
    t.act("h1", "h1-load", ["h1-holding", "truck-at-p1"], ["crate-in-truck", "h1-free"], ["h1-holding"])
    t.act("h1", "h1-send-truck", ["truck-at-p1"], ["truck-at-p2"], ["truck-at-p1"])
    t.act("h2", "h2-recall-truck", ["truck-at-p2"], ["truck-at-p1"], ["truck-at-p2"])
    t.act("h2", "h2-unload", ["crate-in-truck", "truck-at-p2", "h2-free"], ["h2-holding"], ["crate-in-truck", "h2-free"])
    t.act("h2", "h2-drop", ["h2-holding"], ["crate-at-p2", "h2-free"], ["h2-holding"])
    return t.start("crate-at-p1", "h1-free", "h2-free", "truck-at-p1").want("crate-at-p2")


def unsolvable2() -> Task:
    t = Task("unsolvable2", ["a", "b"])
    t.act("a", "a-go", ["a-home"], ["a-away", "signal"], ["a-home"])
    t.act("a", "a-back", ["a-away"], ["a-home"], ["a-away"])
    t.act("b", "b-answer", ["signal", "b-ready"], ["reply"], ["b-ready"])
    t.act("b", "b-finish", ["reply", "b-ready"], ["goal"])
    return t.start("a-home", "b-ready").want("goal")


def cost_choice() -> Task:
    """Cheap two-agent route versus an expensive single-agent shortcut."""
    t = Task("cost_choice", ["x", "y"])
    t.act("x", "x-shortcut", ["x-base"], ["target"], cost=5)
    t.act("x", "x-prep", ["x-base"], ["half"])
    t.act("y", "y-finish", ["half", "y-base"], ["target"])
    return t.start("x-base", "y-base").want("target")


# ---------------------------------------------------------------- privacy pair


def privacy_pair() -> tuple[Task, Task]:
    """Same public behaviour, different private internals.

    The second task renames every private fact (the new names sort in a
    different order), adds an always-true private precondition and two private
    actions that can never fire.
    """
    a = logistics("privacy_a", [("pk1", "c1b", "c2b"), ("pk2", "c2b", "c1a")])
    # private facts by hand: a fact is public iff two agents' actions mention it
    public = {"at-pk1-c1a", "at-pk1-c2a", "at-pk2-c1a", "at-pk2-c2a"}
    private = sorted(f for f in a.facts if f not in public)
    ren = {f: f"z{len(private) - k:02d}-{f.split('-')[0][::-1]}" for k, f in enumerate(private)}
    b = Task("privacy_b", a.agents)

    def r(xs):
        return [ren.get(f, f) for f in xs]

    for act in a.actions:
        pre = r(act["pre"])
        if act["name"] == "drive-t1-c1b-c1a":
            pre = pre + ["t1-licensed"]
        b.act(act["agent"], act["name"], pre, r(act["add"]), r(act["del"]), act["cost"])
    b.act("t1", "t1-repair", ["t1-broken"], ["t1-licensed"])
    b.act("p", "p-refuel", ["p-grounded"], ["p-fuelled"])
    b.start(*r(a.init), "t1-licensed")
    b.want(*r(a.goal))
    return a, b


# ---------------------------------------------------------------- message set

def city_logistics(name: str, n_cities: int, n_locs: int, packages: list[tuple[str, str, str]]) -> Task:
    """Logistics with ``n_locs`` locations per city; location 0 is the airport."""
    trucks = [f"t{c}" for c in range(n_cities)]
    t = Task(name, trucks + ["p"])
    locs = {c: [f"c{c}l{k}" for k in range(n_locs)] for c in range(n_cities)}
    airports = [locs[c][0] for c in range(n_cities)]
    for c, tr in enumerate(trucks):
        for a in locs[c]:
            for b in locs[c]:
                if a != b:
                    t.act(tr, f"drive-{tr}-{a}-{b}", [f"at-{tr}-{a}"], [f"at-{tr}-{b}"], [f"at-{tr}-{a}"])
    for a in airports:
        for b in airports:
            if a != b:
                t.act("p", f"fly-p-{a}-{b}", [f"at-p-{a}"], [f"at-p-{b}"], [f"at-p-{a}"])
    for pk, _, _ in packages:
        for c, tr in enumerate(trucks):
            for loc in locs[c]:
                t.act(tr, f"load-{pk}-{tr}-{loc}", [f"at-{tr}-{loc}", f"at-{pk}-{loc}"], [f"in-{pk}-{tr}"], [f"at-{pk}-{loc}"])
                t.act(tr, f"unload-{pk}-{tr}-{loc}", [f"at-{tr}-{loc}", f"in-{pk}-{tr}"], [f"at-{pk}-{loc}"], [f"in-{pk}-{tr}"])
        for loc in airports:
            t.act("p", f"load-{pk}-p-{loc}", [f"at-p-{loc}", f"at-{pk}-{loc}"], [f"in-{pk}-p"], [f"at-{pk}-{loc}"])
            t.act("p", f"unload-{pk}-p-{loc}", [f"at-p-{loc}", f"in-{pk}-p"], [f"at-{pk}-{loc}"], [f"in-{pk}-p"])
    for c, tr in enumerate(trucks):
        t.start(f"at-{tr}-{airports[c]}")
    t.start(f"at-p-{airports[0]}")
    for pk, src, dst in packages:
        t.start(f"at-{pk}-{src}")
        t.want(f"at-{pk}-{dst}")
    return t


def message_set(seed: int = 2024, count: int = 6) -> list[Task]:
    """Two cities, three locations each, four packages on seeded random routes."""
    rng = random.Random(seed)
    places = [f"c{c}l{k}" for c in range(2) for k in range(3)]
    out = []
    for i in range(count):
        packages = [(f"pk{j}", *rng.sample(places, 2)) for j in range(4)]
        out.append(city_logistics(f"ml{i + 1}", 2, 3, packages))
    return out


# hand-derived: a fact is public iff actions of two different agents mention it
LOGISTICS3_CLASSES = {
    "at-t1-c1a": "t1", "at-t1-c1b": "t1", "at-t2-c2a": "t2", "at-t2-c2b": "t2",
    "at-p-c1a": "p", "at-p-c2a": "p",
    "at-pk1-c1a": "public", "at-pk1-c2a": "public",
    "at-pk1-c1b": "t1", "at-pk1-c2b": "t2",
    "in-pk1-t1": "t1", "in-pk1-t2": "t2", "in-pk1-p": "p",
}

SUITE = [trivial, chain4, chain3, handoff, mbs_private, logistics3_toy, logistics2,
         relay4, witness, rovers2, satellite3, depot2, unsolvable2, cost_choice]


def write(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def main() -> None:
    for make in SUITE:
        t = make()
        write(OUT / "suite" / f"{t.name}.json", t.doc())
    for t in message_set():
        write(OUT / "logistics" / f"{t.name}.json", t.doc())
    a, b = privacy_pair()
    write(OUT / "privacy" / "privacy_a.json", a.doc())
    write(OUT / "privacy" / "privacy_b.json", b.doc())
    write(OUT / "logistics3_toy_classes.json", LOGISTICS3_CLASSES)


if __name__ == "__main__":
    main()
