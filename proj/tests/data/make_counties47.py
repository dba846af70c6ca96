"""Generates counties47.geojson: an irregular 47-region test map.

A 7x7 grid with jittered (shared) vertices. Three pairs of cells are merged,
one cell carries a hole holding an enclave region, and some shared edges are
densified on one side only so neighbours meet at T-junctions. All coordinates
are multiples of 1/64 so midpoints stay exact.
"""
import json
import random

random.seed(47)
N = 7
Q = 1 / 64

def q(v):
    return round(v / Q) * Q

vx = {}
for r in range(N + 1):
    for c in range(N + 1):
        jx = 0 if c in (0, N) else random.choice([-8, -4, 0, 4, 8]) * Q
        jy = 0 if r in (0, N) else random.choice([-8, -4, 0, 4, 8]) * Q
        vx[(r, c)] = (q(c * 2.0 + jx), q(r * 2.0 + jy))

def cell_ring(r, c, densify=()):
    corners = [vx[(r, c)], vx[(r, c + 1)], vx[(r + 1, c + 1)], vx[(r + 1, c)]]
    ring = []
    for k in range(4):
        a, b = corners[k], corners[(k + 1) % 4]
        ring.append(a)
        if k in densify:
            ring.append(((a[0] + b[0]) / 2, (a[1] + b[1]) / 2))
    ring.append(ring[0])
    return [list(p) for p in ring]

merged = {(0, 0): (0, 1), (6, 5): (6, 6), (3, 0): (4, 0)}
skip = set(merged.values())
features = []
fid = 0
for r in range(N):
    for c in range(N):
        if (r, c) in skip:
            continue
        densify = (1,) if (r + c) % 3 == 0 else ()
        if (r, c) in merged:
            r2, c2 = merged[(r, c)]
            if r2 == r:  # horizontal merge
                ring = [vx[(r, c)], vx[(r, c + 1)], vx[(r, c + 2)], vx[(r + 1, c + 2)],
                        vx[(r + 1, c + 1)], vx[(r + 1, c)], vx[(r, c)]]
            else:  # vertical merge
                ring = [vx[(r, c)], vx[(r, c + 1)], vx[(r + 1, c + 1)], vx[(r + 2, c + 1)],
                        vx[(r + 2, c)], vx[(r + 1, c)], vx[(r, c)]]
            coords = [[list(p) for p in ring]]
        else:
            coords = [cell_ring(r, c, densify)]
        if (r, c) == (3, 3):
            cx, cy = vx[(3, 3)]
            hole = [[cx + 0.5, cy + 0.5], [cx + 0.5, cy + 1.25], [cx + 1.25, cy + 1.25],
                    [cx + 1.25, cy + 0.5], [cx + 0.5, cy + 0.5]]
            coords.append(hole)
        features.append({
            "type": "Feature",
            "properties": {"id": "C%02d" % fid, "name": "County %d" % fid},
            "geometry": {"type": "Polygon", "coordinates": coords},
        })
        fid += 1

cx, cy = vx[(3, 3)]
enclave = [[cx + 0.5, cy + 0.5], [cx + 1.25, cy + 0.5], [cx + 1.25, cy + 1.25],
           [cx + 0.5, cy + 1.25], [cx + 0.5, cy + 0.5]]
features.append({
    "type": "Feature",
    "properties": {"id": "C%02d" % fid, "name": "Enclave"},
    "geometry": {"type": "Polygon", "coordinates": [enclave]},
})
assert len(features) == 47, len(features)
with open("counties47.geojson", "w") as fh:
    json.dump({"type": "FeatureCollection", "features": features}, fh, indent=1)
