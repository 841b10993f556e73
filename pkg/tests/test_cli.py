import json

import numpy as np
import pytest

from torusflow import PeriodicCurve, interpolate, run_scenario, torus_circle
from torusflow.cli import (
    main,
    read_snapshot_csv,
    write_evolution_bundle,
    write_snapshot_csv,
    write_surface_obj,
)


def small_curve():
    return interpolate(torus_circle(0.6), 8)


@pytest.fixture(scope="module")
def result():
    return run_scenario("torus:0.6", "bdf1", 16, 1e-3, 0.01, snapshot_times=(0.0, 0.01))


class TestSnapshotCsv:
    def test_round_trip_is_byte_identical(self, tmp_path):
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        curve = small_curve()
        write_snapshot_csv(first, curve)
        back = read_snapshot_csv(first)
        assert np.array_equal(back.positions, curve.positions)
        write_snapshot_csv(second, back)
        assert first.read_bytes() == second.read_bytes()

    def test_header_and_row_layout(self, tmp_path):
        path = tmp_path / "c.csv"
        write_snapshot_csv(path, PeriodicCurve(np.array([[1.5, 0.0], [2.0, 0.25], [1.0, -1.0]])))
        lines = path.read_text().splitlines()
        assert lines[0] == "j,r,z"
        assert lines[1] == "0,1.5,0.0"
        assert lines[2] == "1,2.0,0.25"
        assert len(lines) == 4

    def test_read_rejects_foreign_files(self, tmp_path):
        path = tmp_path / "junk.csv"
        path.write_text("x,y\n1,2\n")
        with pytest.raises(ValueError):
            read_snapshot_csv(path)


class TestSurfaceObj:
    def test_mesh_counts_and_index_range(self, tmp_path):
        path = tmp_path / "m.obj"
        J, segments = 8, 12
        write_surface_obj(path, small_curve(), segments=segments)
        verts, faces = [], []
        for line in path.read_text().splitlines():
            kind, *rest = line.split()
            if kind == "v":
                verts.append([float(x) for x in rest])
            else:
                assert kind == "f"
                faces.append([int(x) for x in rest])
        assert len(verts) == J * segments
        assert len(faces) == 2 * J * segments
        flat = [i for face in faces for i in face]
        assert min(flat) == 1 and max(flat) == J * segments
        # a closed torus grid: every undirected edge is shared by two faces
        edges = set()
        for a, b, c in faces:
            for u, v in ((a, b), (b, c), (c, a)):
                edges.add((min(u, v), max(u, v)))
        assert len(edges) == 3 * J * segments

    def test_vertices_lie_on_revolved_circles(self, tmp_path):
        path = tmp_path / "m.obj"
        curve = small_curve()
        segments = 6
        write_surface_obj(path, curve, segments=segments)
        rows = [
            [float(x) for x in line.split()[1:]]
            for line in path.read_text().splitlines()
            if line.startswith("v ")
        ]
        for j in range(curve.node_count):
            r, z = curve.positions[j]
            for k in range(segments):
                x, y, w = rows[j * segments + k]
                assert np.hypot(x, w) == pytest.approx(r, abs=1e-12)
                assert y == z

    def test_rejects_degenerate_revolution(self, tmp_path):
        with pytest.raises(ValueError):
            write_surface_obj(tmp_path / "m.obj", small_curve(), segments=2)


class TestEvolutionBundle:
    def test_file_inventory(self, result, tmp_path):
        bundle = write_evolution_bundle(result, tmp_path / "out", export_obj=True, obj_segments=8)
        assert bundle.diagnostics.name == "diagnostics.csv"
        assert bundle.metadata.name == "metadata.json"
        assert [p.name for p in bundle.snapshots] == ["snapshot_t0.csv", "snapshot_t0.01.csv"]
        assert [p.name for p in bundle.meshes] == ["snapshot_t0.obj", "snapshot_t0.01.obj"]
        for path in [bundle.diagnostics, bundle.metadata, *bundle.snapshots, *bundle.meshes]:
            assert path.is_file()

    def test_diagnostics_table(self, result, tmp_path):
        bundle = write_evolution_bundle(result, tmp_path / "out")
        lines = bundle.diagnostics.read_text().splitlines()
        assert lines[0] == "m,t,mesh_ratio,min_r,diameter"
        assert len(lines) == 12  # initial state plus ten steps
        first = lines[1].split(",")
        assert first[0] == "0" and float(first[1]) == 0.0
        for line in lines[1:]:
            m, t, ratio, min_r, diam = line.split(",")
            assert float(ratio) >= 1.0
            assert 0.0 < float(min_r) < 1.0
            assert 0.0 < float(diam) < 2.0

    def test_metadata_contents(self, result, tmp_path):
        bundle = write_evolution_bundle(
            result, tmp_path / "out", command_args={"subcommand": "evolve"}
        )
        meta = json.loads(bundle.metadata.read_text())
        assert meta["tool"]["name"] == "torusflow"
        assert meta["event"]["kind"] == "reached_T"
        assert meta["event"]["time"] == pytest.approx(0.01)
        assert meta["command"] == {"subcommand": "evolve"}
        assert [s["file"] for s in meta["snapshots"]] == ["snapshot_t0.csv", "snapshot_t0.01.csv"]
        assert [s["step"] for s in meta["snapshots"]] == [0, 10]
        assert set(meta["thresholds"]) == {"axis", "collapse", "edge_fraction"}

    def test_snapshots_round_trip(self, result, tmp_path):
        bundle = write_evolution_bundle(result, tmp_path / "out")
        for snap, path in zip(result.snapshots, bundle.snapshots):
            assert np.array_equal(read_snapshot_csv(path).positions, snap.curve.positions)


class TestConvergeCommand:
    ARGS = [
        "converge",
        "--scheme",
        "bdf2",
        "--axis",
        "spatial",
        "--levels",
        "8,16",
        "--t-end",
        "0.1",
        "--fixed-steps",
        "50",
    ]

    def test_writes_table(self, tmp_path, capsys):
        out = tmp_path / "table.csv"
        assert main(self.ARGS + ["--out", str(out), "--verbose"]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "resolution,err_l2,order_l2,err_h1,order_h1"
        assert len(lines) == 3
        first, second = lines[1].split(","), lines[2].split(",")
        assert first[0] == "8" and second[0] == "16"
        assert first[2] == "" and first[4] == ""  # no orders on the first row
        assert 1.8 <= float(second[2]) <= 2.2
        assert 0.9 <= float(second[4]) <= 1.1
        assert float(second[1]) < float(first[1])
        assert "level 8" in capsys.readouterr().err

    def test_stdout_output_and_determinism(self, tmp_path, capsys):
        assert main(self.ARGS + ["--out", "-"]) == 0
        first = capsys.readouterr().out
        assert main(self.ARGS + ["--out", "-"]) == 0
        assert capsys.readouterr().out == first


class TestEvolveCommand:
    def test_bundle_and_status_line(self, tmp_path, capsys):
        out = tmp_path / "run"
        code = main(
            [
                "evolve",
                "--scenario",
                "torus:0.6",
                "--scheme",
                "cn",
                "--nodes",
                "16",
                "--dt",
                "1e-3",
                "--t-end",
                "0.01",
                "--snapshots",
                "0,0.01",
                "--out",
                str(out),
                "--export-obj",
                "--obj-segments",
                "8",
            ]
        )
        assert code == 0
        assert capsys.readouterr().out.startswith("reached_T at t=0.01; wrote ")
        names = sorted(p.name for p in out.iterdir())
        assert names == [
            "diagnostics.csv",
            "metadata.json",
            "snapshot_t0.01.csv",
            "snapshot_t0.01.obj",
            "snapshot_t0.csv",
            "snapshot_t0.obj",
        ]
        meta = json.loads((out / "metadata.json").read_text())
        assert meta["command"]["scenario"] == "torus:0.6"
        assert meta["command"]["export_obj"] is True


class TestBisectCommand:
    def test_stdout_log_and_bracket(self, capsys):
        code = main(
            [
                "bisect",
                "--lower",
                "0.5",
                "--upper",
                "0.7",
                "--tol",
                "0.1",
                "--scheme",
                "cn",
                "--nodes",
                "48",
                "--dt",
                "1e-3",
                "--out",
                "-",
            ]
        )
        assert code == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "r,event,t_event"
        assert lines[1].startswith("0.5,curve_collapse,")
        assert lines[2].startswith("0.7,axis_touch,")
        tail = lines[-1].split(",")
        assert tail[0] == "bracket"
        low, high = float(tail[1]), float(tail[2])
        assert 0.5 <= low < high <= 0.7
        assert high - low <= 0.1 + 1e-12


class TestErrorHandling:
    def test_domain_errors_exit_nonzero(self, capsys, tmp_path):
        cases = [
            ["converge", "--scheme", "bdf2", "--axis", "spatial", "--levels", "16,8", "--out", "-"],
            ["evolve", "--scenario", "banana", "--scheme", "cn", "--nodes", "16",
             "--dt", "1e-3", "--t-end", "0.01", "--out", str(tmp_path / "x")],
            ["evolve", "--scenario", "torus:0.6", "--scheme", "cn", "--nodes", "16",
             "--dt", "1e-3", "--t-end", "0.0015", "--out", str(tmp_path / "y")],
            ["bisect", "--lower", "0.7", "--upper", "0.5", "--tol", "0.01", "--scheme", "cn"],
        ]
        for argv in cases:
            assert main(argv) == 1
            assert capsys.readouterr().err.startswith("error: ")

    def test_usage_errors_exit_via_argparse(self):
        with pytest.raises(SystemExit):
            main([])
        with pytest.raises(SystemExit):
            main(["converge", "--scheme", "bdf1", "--axis", "spatial", "--levels", "8", "--out", "-"])
