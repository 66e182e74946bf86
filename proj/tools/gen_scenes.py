#!/usr/bin/env python3
"""Generate the scene config JSONs (wall outlines, target geometry).

The outlines are frozen into configs/ so the C++ code never depends on this
script at runtime; rerun it only when changing scene geometry.
"""
import json
import math
import os

OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "configs")


def stomach_wall():
    """Entry throat feeding an elliptic chamber. CCW."""
    cx, cy, a, b = 60.0, 0.0, 52.0, 36.0
    throat_half = 9.0
    # Ellipse angle where y = +/- throat_half.
    theta_join = math.pi - math.asin(throat_half / b)  # upper-left quadrant
    pts = []
    pts.append((-5.0, -throat_half))
    # Bottom throat edge to the ellipse joint.
    x_join = cx + a * math.cos(theta_join)
    pts.append((x_join, -throat_half))
    # Ellipse arc CCW from -theta_join to +theta_join (through theta = 0).
    n_arc = 72
    for i in range(1, n_arc):
        t = -theta_join + (2.0 * theta_join) * i / n_arc
        pts.append((cx + a * math.cos(t), cy + b * math.sin(t)))
    pts.append((x_join, throat_half))
    pts.append((-5.0, throat_half))
    return [(round(x, 4), round(y, 4)) for x, y in pts]


def resample(p0, p1, spacing):
    d = math.dist(p0, p1)
    n = max(1, int(d / spacing))
    return [(p0[0] + (p1[0] - p0[0]) * i / n, p0[1] + (p1[1] - p0[1]) * i / n)
            for i in range(n)]


def vessel_wall():
    """Straight trunk splitting into two symmetric branches (planar Y). CCW."""
    trunk_half = 9.0
    branch_half = 8.0
    branch_len = 34.0
    ang = math.radians(30.0)
    jx = 60.0  # bifurcation point on the centerline
    d_u = (math.cos(ang), math.sin(ang))
    d_l = (math.cos(-ang), math.sin(-ang))

    def along(p, d, t, off, n):
        return (p[0] + d[0] * t + n[0] * off, p[1] + d[1] * t + n[1] * off)

    # Outer wall of the lower branch meets the trunk bottom edge.
    n_l_out = (d_l[1], -d_l[0])          # (-0.5, -0.866) side
    base_l = along((jx, 0.0), d_l, 0.0, branch_half, n_l_out)
    t_meet = (trunk_half + base_l[1]) / -d_l[1] if d_l[1] != 0 else 0.0
    p_junction_low = (base_l[0] + d_l[0] * t_meet, -trunk_half)
    low_out_end = along((jx, 0.0), d_l, branch_len, branch_half, n_l_out)

    n_l_in = (-d_l[1], d_l[0])
    low_in_end = along((jx, 0.0), d_l, branch_len, branch_half, n_l_in)
    # Wedge apex: inner walls of the two branches meet on the centerline.
    base_in = along((jx, 0.0), d_l, 0.0, branch_half, n_l_in)
    t_apex = base_in[1] / (-d_l[1])
    apex = (base_in[0] + d_l[0] * t_apex, 0.0)

    n_u_in = (d_u[1], -d_u[0])
    up_in_end = along((jx, 0.0), d_u, branch_len, branch_half, n_u_in)
    n_u_out = (-d_u[1], d_u[0])
    up_out_end = along((jx, 0.0), d_u, branch_len, branch_half, n_u_out)
    base_u = along((jx, 0.0), d_u, 0.0, branch_half, n_u_out)
    t_meet_u = (trunk_half - base_u[1]) / d_u[1]
    p_junction_up = (base_u[0] + d_u[0] * t_meet_u, trunk_half)

    x_left = -20.0
    spacing = 6.0
    pts = []
    pts += resample((x_left, -trunk_half), p_junction_low, spacing)
    pts += resample(p_junction_low, low_out_end, spacing)
    pts += resample(low_out_end, low_in_end, spacing)
    pts += resample(low_in_end, apex, spacing)
    pts += resample(apex, up_in_end, spacing)
    pts += resample(up_in_end, up_out_end, spacing)
    pts += resample(up_out_end, p_junction_up, spacing)
    pts += resample(p_junction_up, (x_left, trunk_half), spacing)
    pts += resample((x_left, trunk_half), (x_left, -trunk_half), spacing)
    branch_ends = {
        "upper": [round(jx + d_u[0] * (branch_len - 6.0), 4),
                  round(d_u[1] * (branch_len - 6.0), 4)],
        "lower": [round(jx + d_l[0] * (branch_len - 6.0), 4),
                  round(d_l[1] * (branch_len - 6.0), 4)],
        "radius": 3.5,
    }
    return [(round(x, 4), round(y, 4)) for x, y in pts], branch_ends


ROBOT = {
    "num_segments": 8,
    "segment_length": 8.0,
    "actuated_fraction": 0.15,
    "young_modulus": 15000.0,
    "poisson_ratio": 0.3,
    "axial_stiffness": 6.0,
    "damping": 0.025,
    "tendon_offsets": [2.5, 2.5, 2.5, 2.5],
    "tendon_gain": 9.0,
    "node_mass": 0.02,
    "plane_stiffness": 3.0,
    "max_tendon_travel": 6.0,
    "max_insertion": 30.0,
}


def main():
    os.makedirs(OUT_DIR, exist_ok=True)

    stomach = {
        "schema": "jacrl.scene.v1",
        "scene": {
            "kind": "stomach",
            "wall_stiffness": 5.0,
            "peristalsis": {"amplitude": 1.5, "frequency": 0.5, "wavenumber": 0.08},
            "entry": {"point": [5.0, 0.0], "angle": 0.0},
            "wall_vertices": [list(p) for p in stomach_wall()],
            "target_region": [[62.0, 2.0], [95.0, 2.0], [95.0, 20.0], [62.0, 20.0]],
        },
        "robot": dict(ROBOT),
        "targets": {"generator_seed": 90210, "count_per_list": 10, "min_separation": 4.0},
    }
    with open(os.path.join(OUT_DIR, "stomach.json"), "w") as f:
        json.dump(stomach, f, indent=1)
        f.write("\n")

    wall, ends = vessel_wall()
    vessel_robot = dict(ROBOT)
    vessel_robot["max_insertion"] = 45.0
    vessel = {
        "schema": "jacrl.scene.v1",
        "scene": {
            "kind": "vessel",
            "wall_stiffness": 5.0,
            "peristalsis": {"amplitude": 1.0, "frequency": 0.8, "wavenumber": 0.1},
            "entry": {"point": [-15.0, 0.0], "angle": 0.0},
            "wall_vertices": [list(p) for p in wall],
            "branch_ends": ends,
        },
        "robot": vessel_robot,
        "targets": {"generator_seed": 90211, "count_per_list": 5, "min_separation": 2.0},
    }
    with open(os.path.join(OUT_DIR, "vessel.json"), "w") as f:
        json.dump(vessel, f, indent=1)
        f.write("\n")
    print("wrote", OUT_DIR)


if __name__ == "__main__":
    main()
