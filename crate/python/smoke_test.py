"""Builds the extension with cargo, imports it and exercises the main calls.

Usage: python3 python/smoke_test.py [--release]
"""

import json
import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def build(release):
    cmd = ["cargo", "build", "-p", "rem-py"] + (["--release"] if release else [])
    subprocess.run(cmd, cwd=ROOT, check=True)
    lib = ROOT / "target" / ("release" if release else "debug") / "librem_py.so"
    dest = Path(tempfile.mkdtemp(prefix="rem_py_"))
    shutil.copy(lib, dest / "rem_py.so")
    sys.path.insert(0, str(dest))


def main():
    build("--release" in sys.argv)
    import rem_py

    scene = rem_py.Scene.generate(networks=3, seed=1)
    assert scene.num_parameters == 8
    xi = scene.boundary_length()
    assert abs(scene.boundary_length_raster(1024) - xi) / xi < 1e-3
    back = rem_py.Scene.from_json(scene.to_json())
    assert back.disks() == scene.disks()

    one = rem_py.Scene([[(0.5, 0.5, 0.25)]])
    assert one.detect(1, 0.5, 0.5) and not one.detect(1, 0.0, 0.0)
    assert one.radio_parameter(0.5, 0.5) == 1
    assert abs(one.boundary_length() - 2 * math.pi * 0.25) < 1e-12

    part = rem_py.Partition(scene, 16, subsamples=32)
    assert part.mesh_count == 256
    assert abs(sum(part.weights()) - 1.0) < 1e-12
    rpe = part.region_rpe()
    rem = part.build_rem("one-per-mesh", seed=3)
    assert rem.empty_count == 0 and rem.measured_error >= rpe - 1e-12
    rnd = part.build_rem("random", k=1.0, seed=3)
    assert rnd.empty_count > 0 and len(rnd.assignment()) == 256
    with tempfile.TemporaryDirectory() as d:
        ppm, pgm = rnd.render(str(Path(d) / "rem"), scale=2)
        assert Path(ppm).read_bytes().startswith(b"P6\n32 32\n255\n")
        assert Path(pgm).read_bytes().startswith(b"P5\n32 32\n255\n")

    assert rem_py.mesh_rpe([0.6, 0.4]) == 0.4
    assert rem_py.mesh_entropy([0.5, 0.5]) == 1.0
    probs, area = rem_py.fuse([1.0, 0.0], 1.0, [0.0, 1.0], 3.0)
    assert probs == [0.25, 0.75] and area == 4.0
    assert rem_py.feder_merhav_phi(7 / 8, 8) == 3.0
    assert abs(rem_py.fano_upper_psi(0.5, 8) - 2.403677461028802) < 1e-12
    req = rem_py.sensor_requirements(8, 4.0, 1.0, 0.04, 2.0)
    assert req == {"m1": 61250, "m2": 596, "m3": None}
    e_xi, e_pe = rem_py.expected_cut_constants()
    mc = rem_py.mc_line(200_000, 7)
    assert abs(mc["mean_xi"] - e_xi) / e_xi < 0.01
    assert abs(mc["mean_pe"] - e_pe) / e_pe < 0.01

    try:
        rem_py.fano_upper_psi(0.95, 8)
    except ValueError:
        pass
    else:
        raise AssertionError("out-of-domain probability accepted")

    spec = {
        "scene": {"kind": "generate", "networks": 3, "region_edge": 1.0, "seed": 1,
                  "radius_min": 0.15, "radius_max": 0.3, "disks_per_network": 1},
        "mesh_sides": [8, 16],
        "schemes": ["one-per-mesh", "random"],
        "k_values": [4.0],
        "seeds": 2,
        "master_seed": 0,
        "subsamples": 8,
    }
    record = json.loads(rem_py.sweep(json.dumps(spec), compare=True))
    assert len(record["rows"]) == 8 and len(record["pairs"]) == 1
    print("rem_py smoke test passed: xi=%.6f region_rpe=%.6f" % (xi, rpe))


if __name__ == "__main__":
    main()
