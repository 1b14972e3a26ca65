#!/usr/bin/env python3
"""Regenerate the Verilog fixtures in this directory.

Run from anywhere; output is deterministic. Hand-written fixtures live next
to the generated ones and are not touched.
"""

import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))


def init_literal(bits):
    """bits[i] is the row for index i; rightmost digit is bit 0."""
    width = len(bits)
    text = "".join("1" if b else "0" for b in reversed(bits))
    if width >= 8 and width % 4 == 0:
        value = int(text, 2)
        return f"{width}'h{value:0{width // 4}X}"
    return f"{width}'b{text}"


def write(path, lines):
    with open(os.path.join(HERE, path), "w") as f:
        f.write("\n".join(lines) + "\n")


def harpoon():
    # Obfuscation mode: sO0..sO4 and the detour sA0..sA2; original: s0..s3.
    names = ["sO0", "sO1", "sO2", "sO3", "sO4", "sA0", "sA1", "sA2", "s0", "s1", "s2", "s3"]
    code = {n: i for i, n in enumerate(names)}
    # Assignment a = x0 + 2*x1. Key: 1, 2, 3.
    def step(state, a):
        if state == "sO0":
            return "sO1" if a == 1 else "sA0"
        if state == "sO1":
            return "sO2" if a == 2 else "sO3"
        if state == "sO2":
            return "s0" if a == 3 else "sO4"
        if state == "sO3":
            return "sO0"
        if state == "sO4":
            return {0: "sO3", 1: "sO0", 2: "sO1", 3: "sO3"}[a]
        if state == "sA0":
            return "sA1"
        if state == "sA1":
            return "sA2"
        if state == "sA2":
            return "sO0"
        if state == "s0":
            return "s1"
        if state == "s1":
            return "s2"
        if state == "s2":
            return "s3" if a & 1 else "s2"
        if state == "s3":
            return "s0"
        raise ValueError(state)

    lines = [
        "// Obfuscated controller: five obfuscation states, a three-state",
        "// detour and a four-state functional core, binary encoded in four registers.",
        "module harpoon_fsm (clk, x0, x1, q0, q1, q2, q3);",
        "  input clk, x0, x1;",
        "  output q0, q1, q2, q3;",
        "  wire d0, d1, d2, d3;",
    ]
    for bit in range(4):
        rows = []
        for idx in range(64):
            s, a = idx & 15, idx >> 4
            nxt = code[step(names[s], a)] if s < len(names) else code["sO0"]
            rows.append(bool(nxt >> bit & 1))
        lines.append(
            f"  LUT6 #(.INIT({init_literal(rows)})) next{bit} "
            f"(.I0(q0), .I1(q1), .I2(q2), .I3(q3), .I4(x0), .I5(x1), .O(d{bit}));"
        )
    for bit in range(4):
        lines.append(f"  DFF #(.INIT(1'b0)) state{bit} (.D(d{bit}), .C(clk), .Q(q{bit}));")
    lines.append("endmodule")
    write("harpoon_fsm.v", lines)


def gray_counter():
    def gray(n):
        return n ^ (n >> 1)

    inverse = {gray(n): n for n in range(8)}
    lines = [
        "module gray3 (clk, g0, g1, g2);",
        "  input clk;",
        "  output g0, g1, g2;",
        "  wire d0, d1, d2;",
    ]
    for bit in range(3):
        rows = [bool(gray((inverse[i] + 1) % 8) >> bit & 1) for i in range(8)]
        lines.append(
            f"  LUT3 #(.INIT({init_literal(rows)})) n{bit} (.I0(g0), .I1(g1), .I2(g2), .O(d{bit}));"
        )
    for bit in range(3):
        lines.append(f"  DFF #(.INIT(1'b0)) r{bit} (.D(d{bit}), .C(clk), .Q(g{bit}));")
    lines.append("endmodule")
    write("fsm_gray3.v", lines)


def mealy():
    # IDLE=0, RUN=1, PAUSE=2, DONE=3; inputs go, stop.
    def step(s, go, stop):
        if s == 0:
            return 1 if go else 0
        if s == 1:
            if stop:
                return 2
            return 3 if go else 1
        if s == 2:
            return 1 if go and not stop else 2
        return 0 if not go else 3

    lines = [
        "// Four-state controller with a synchronous reset and a Mealy output.",
        "module mealy4 (clk, rst, go, stop, busy, q0, q1);",
        "  input clk, rst, go, stop;",
        "  output busy, q0, q1;",
        "  wire d0, d1, run;",
    ]
    for bit in range(2):
        rows = []
        for idx in range(16):
            s, go, stop = idx & 3, idx >> 2 & 1, idx >> 3 & 1
            rows.append(bool(step(s, go, stop) >> bit & 1))
        lines.append(
            f"  LUT4 #(.INIT({init_literal(rows)})) n{bit} (.I0(q0), .I1(q1), .I2(go), .I3(stop), .O(d{bit}));"
        )
    lines += [
        "  DFFRE #(.INIT(1'b0)) r0 (.D(d0), .CE(1'b1), .R(rst), .C(clk), .Q(q0));",
        "  DFFRE #(.INIT(1'b0)) r1 (.D(d1), .CE(1'b1), .R(rst), .C(clk), .Q(q1));",
        "  AND2 a0 (.A(q0), .B(go), .O(run));",
        "  BUF b0 (.I(run), .O(busy));",
        "endmodule",
    ]
    write("fsm_mealy4.v", lines)


GATES = [
    ("INV", ["I"]),
    ("BUF", ["I"]),
    ("AND2", ["A", "B"]),
    ("AND3", ["A", "B", "C"]),
    ("OR2", ["A", "B"]),
    ("OR3", ["A", "B", "C"]),
    ("NAND2", ["A", "B"]),
    ("NOR2", ["A", "B"]),
    ("XOR2", ["A", "B"]),
    ("XNOR2", ["A", "B"]),
    ("MUX2", ["I0", "I1", "S"]),
]


def random_design(name, rng, n_inputs, n_gates, n_ffs, lut_share, tie_share):
    """Layered random logic. Every cone reads at most n_inputs + n_ffs leaves."""
    inputs = [f"in{i}" for i in range(n_inputs)]
    ff_q = [f"s{i}" for i in range(n_ffs)]
    pool = inputs + ff_q
    body = []
    wires = []
    for g in range(n_gates):
        out = f"w{g}"
        wires.append(out)
        recent = pool[-24:] if len(pool) > 24 else pool
        if rng.random() < lut_share:
            k = rng.randint(2, 4)
            ins = [rng.choice(recent) for _ in range(k)]
            tie = None
            if rng.random() < tie_share:
                tie = (rng.randrange(k), rng.random() < 0.5)
            rows = []
            for idx in range(1 << k):
                reachable = tie is None or (idx >> tie[0] & 1) == int(tie[1])
                rows.append(reachable and rng.random() < 0.5)
            conns = []
            for j, src in enumerate(ins):
                if tie is not None and tie[0] == j:
                    src = "1'b1" if tie[1] else "1'b0"
                conns.append(f".I{j}({src})")
            body.append(
                f"  LUT{k} #(.INIT({init_literal(rows)})) u{g} ({', '.join(conns)}, .O({out}));"
            )
        else:
            cell, pins = rng.choice(GATES)
            conns = ", ".join(f".{p}({rng.choice(recent)})" for p in pins)
            body.append(f"  {cell} u{g} ({conns}, .O({out}));")
        pool.append(out)
    outputs = [f"out{i}" for i in range(max(1, n_gates // 25))]
    tail = wires[-len(outputs) * 3:] if wires else inputs
    for i, o in enumerate(outputs):
        body.append(f"  BUF ob{i} (.I({rng.choice(tail)}), .O({o}));")
    for i, q in enumerate(ff_q):
        body.append(f"  DFF #(.INIT(1'b{rng.randint(0, 1)})) ff{i} (.D({rng.choice(wires)}), .C(clk), .Q({q}));")
    ports = (["clk"] if n_ffs else []) + inputs + outputs
    lines = [f"module {name} ({', '.join(ports)});"]
    lines.append(f"  input {', '.join((['clk'] if n_ffs else []) + inputs)};")
    lines.append(f"  output {', '.join(outputs)};")
    internal = wires + ff_q
    for i in range(0, len(internal), 12):
        lines.append(f"  wire {', '.join(internal[i:i + 12])};")
    lines += body
    lines.append("endmodule")
    return lines


def corpus():
    rng = random.Random(2019)
    os.makedirs(os.path.join(HERE, "corpus"), exist_ok=True)
    sizes = [1, 3, 8, 15, 25, 40, 60, 90, 120, 160, 200, 260, 320, 400, 440, 475]
    for i, n in enumerate(sizes):
        n_inputs = rng.randint(2, 12)
        n_ffs = rng.randint(0, 4) if n > 10 else 0
        lines = random_design(f"rand{i:02}", rng, n_inputs, n, n_ffs, 0.3, 0.3)
        write(os.path.join("corpus", f"rand{i:02}.v"), lines)


if __name__ == "__main__":
    harpoon()
    gray_counter()
    mealy()
    corpus()
