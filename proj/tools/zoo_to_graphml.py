#!/usr/bin/env python3
"""Convert topohub node-link JSON (Topology Zoo subset) into Topology Zoo style GraphML.

usage: zoo_to_graphml.py <topohub wheel or extracted data dir> <out dir> [names...]
"""
import json
import pathlib
import sys
import zipfile
from xml.sax.saxutils import escape, quoteattr

DEFAULT = ["Abilene", "BtNorthAmerica", "AttMpls", "Bellcanada"]


def load(src, name):
    member = f"topohub/data/topozoo/{name}.json"
    p = pathlib.Path(src)
    if p.is_file():
        with zipfile.ZipFile(p) as z:
            return json.loads(z.read(member))
    return json.loads((p / member).read_text())


def to_graphml(name, d):
    out = ['<?xml version="1.0" encoding="utf-8"?>',
           '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">',
           '  <key attr.name="label" attr.type="string" for="node" id="d0" />',
           '  <key attr.name="Longitude" attr.type="double" for="node" id="d1" />',
           '  <key attr.name="Latitude" attr.type="double" for="node" id="d2" />',
           f'  <graph edgedefault="undirected" id={quoteattr(name)}>']
    for n in d["nodes"]:
        out.append(f'    <node id={quoteattr(str(n["id"]))}>')
        out.append(f'      <data key="d0">{escape(str(n.get("name", n["id"])))}</data>')
        if "pos" in n:
            out.append(f'      <data key="d1">{n["pos"][0]}</data>')
            out.append(f'      <data key="d2">{n["pos"][1]}</data>')
        out.append('    </node>')
    for e in d.get("edges", d.get("links", [])):
        out.append(f'    <edge source={quoteattr(str(e["source"]))} target={quoteattr(str(e["target"]))} />')
    out += ['  </graph>', '</graphml>', '']
    return "\n".join(out)


def main(argv):
    if len(argv) < 3:
        print(__doc__, file=sys.stderr)
        return 2
    outdir = pathlib.Path(argv[2])
    outdir.mkdir(parents=True, exist_ok=True)
    for name in argv[3:] or DEFAULT:
        (outdir / f"{name}.graphml").write_text(to_graphml(name, load(argv[1], name)))
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
