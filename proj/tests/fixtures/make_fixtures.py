#!/usr/bin/env python3
"""Generates the case-study shaped fixtures (riot_like, qemu_like).

Output is deterministic for a given seed. Blob ids are SHA-256 of the
content, which is embedded in each blob record.
"""
import base64
import hashlib
import json
import random
import sys
from pathlib import Path


class Builder:
    def __init__(self, prefix):
        self.prefix = prefix
        self.blobs = {}
        self.commits = []
        self.projects = []
        self.n = 0
        self.t = 1_500_000_000

    def blob(self, text):
        data = text.encode()
        bid = hashlib.sha256(data).hexdigest()
        self.blobs[bid] = data
        return bid

    def commit(self, parents, tree, message="update"):
        self.n += 1
        self.t += 3600
        cid = f"{self.prefix}{self.n:05d}"
        self.commits.append({"type": "commit", "id": cid, "parents": parents,
                             "timestamp": self.t, "message": message, "tree": dict(tree)})
        return cid

    def project(self, name, head):
        self.projects.append({"type": "project", "name": name, "head": head})

    def write(self, path):
        lines = []
        for bid, data in sorted(self.blobs.items()):
            lines.append({"type": "blob", "id": bid, "content_b64": base64.b64encode(data).decode()})
        lines += self.commits + self.projects
        Path(path).write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in lines))


def clone_history(b, rng, base_tree, name, edit_paths, extra_file):
    """A project that copies base_tree in a root commit, then optionally adds
    unrelated commits. edit_paths are rewritten locally to fresh content."""
    tree = dict(base_tree)
    tree[extra_file] = b.blob(f"{name} main {rng.random()}")
    head = b.commit([], tree, f"Import upstream sources into {name}")
    for _ in range(rng.randint(0, 3)):
        tree[extra_file] = b.blob(f"{name} work {rng.random()}")
        head = b.commit([head], tree, "Local work")
    for p in edit_paths:
        tree[p] = b.blob(f"{name} local rewrite of {p} {rng.random()}")
        head = b.commit([head], tree, f"Rework {p}")
    return head


def riot_like(path, seed=8289):
    rng = random.Random(seed)
    b = Builder("riot-")
    src = "sys/net/network_layer/ipv6/addr/ipv6_addr_from_str.c"
    test = "tests/unit/tests-ipv6_addr/tests-ipv6_addr.c"
    other = "core/sched.c"

    s0, t0 = b.blob("ipv6_addr_from_str: unchecked copy"), b.blob("ipv6 tests v0")
    o0 = b.blob("sched v0")
    r1 = b.commit([], {src: s0, test: t0, other: o0}, "Initial network stack")
    s1, t1 = b.blob("ipv6_addr_from_str: bounds checked"), b.blob("ipv6 tests v1 with overflow case")
    fix = b.commit([r1], {src: s1, test: t1, other: o0}, "ipv6_addr: fix stack overflow (CVE-2017-8289)")
    head = b.commit([fix], {src: s1, test: t1, other: b.blob("sched v1")}, "sched: cleanup")
    b.project("RIOT", head)

    # Stale forks sharing upstream history from before the fix.
    for i in range(6):
        b.project(f"riot-fork-{i:02d}", r1)

    for i in range(39):
        files = rng.choice([{src: s0}, {test: t0}, {src: s0, test: t0}])
        b.project(f"iot-vuln-{i:02d}", clone_history(b, rng, files, f"iot-vuln-{i:02d}", [], "main.c"))

    for i in range(38):
        files = rng.choice([{src: s0}, {src: s0, test: t0}])
        edits = list(files)
        b.project(f"iot-edit-{i:02d}", clone_history(b, rng, files, f"iot-edit-{i:02d}", edits, "main.c"))

    # Adopted only the fixed revision: not a candidate.
    for i in range(3):
        b.project(f"iot-new-{i:02d}", clone_history(b, rng, {src: s1}, f"iot-new-{i:02d}", [], "main.c"))
    for i in range(4):
        b.project(f"unrelated-{i:02d}", clone_history(b, rng, {}, f"unrelated-{i:02d}", [], "app.c"))
    b.write(path)


def qemu_like(path, seed=17962):
    rng = random.Random(seed)
    b = Builder("qemu-")
    pc = "hw/net/pcnet.c"
    other = "hw/net/ne2000.c"

    p0 = b.blob("pcnet_receive: int size")
    q1 = b.commit([], {pc: p0, other: b.blob("ne2000 v0")}, "Initial emulator import")
    p1 = b.blob("pcnet_receive: size_t size")
    fix = b.commit([q1], {pc: p1, other: b.blob("ne2000 v0")}, "pcnet: fix possible buffer overflow")
    p2 = b.blob("pcnet_receive: size_t size, tracing")
    head = b.commit([fix], {pc: p2, other: b.blob("ne2000 v0")}, "pcnet: add tracing")
    b.project("QEMU", head)

    for i in range(63):
        b.project(f"emu-vuln-{i:02d}", clone_history(b, rng, {pc: p0}, f"emu-vuln-{i:02d}", [], "board.c"))
    for i in range(39):
        b.project(f"emu-edit-{i:02d}", clone_history(b, rng, {pc: p0}, f"emu-edit-{i:02d}", [pc], "board.c"))

    # Copied before the fix, later pulled the fixed file.
    tree = {pc: p0, "board.c": b.blob("patched board")}
    c = b.commit([], tree, "Import pcnet")
    tree[pc] = p2
    b.project("emu-updated", b.commit([c], tree, "Sync pcnet with upstream"))
    b.write(path)


if __name__ == "__main__":
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent
    riot_like(out / "riot_like.jsonl")
    qemu_like(out / "qemu_like.jsonl")
