"""Mission service: pairing, journaling, alerts, recalls, replay."""

import json

import pytest

from firewatch import codec
from firewatch.geo import GeoPoint
from firewatch.geofence import DraftBoundary, DraftRejected
from firewatch.service import (
    IncidentConfig,
    LedState,
    LogKind,
    LogWriter,
    MissionService,
    UnknownUnit,
    read_log,
    replay_log,
    tick_grid,
)
from firewatch.vitals import compute_stress


def helm_line(uid=1, seq=0, lat=40.0005, lon=-88.0, fix=True, ambient=25.0,
              yaw=90.0, accel=(0.0, 0.0, 0.0)):
    return codec.encode(codec.HelmFrame(id=uid, seq=seq, gps_fix=fix, lat=lat, lon=lon,
                                        ambient_c=ambient, yaw=yaw, pitch=0.0, roll=0.0,
                                        lin_accel=accel))


def strap_line(uid=1, seq=0, hr=90, pulse=90, spo2=98.0, body=36.8):
    return codec.encode(codec.StrapFrame(id=uid, seq=seq, hr_bpm=hr, pulse_bpm=pulse,
                                         spo2_pct=spo2, body_c=body))


def make_service(**kwargs) -> MissionService:
    config = IncidentConfig(origin=GeoPoint(40.0, -88.0), roster=(1, 2))
    return MissionService(config, **kwargs)


class TestPairing:
    def test_helm_and_strap_merge_into_one_unit(self):
        svc = make_service()
        svc.ingest(helm_line(uid=1, seq=0), 1.0)
        svc.ingest(strap_line(uid=1, seq=0), 1.5)
        unit = svc.unit(1)
        assert unit["heading_deg"] == 90.0
        assert unit["hr_bpm"] == 90
        assert unit["helm_last_seen"] == 1.0
        assert unit["strap_last_seen"] == 1.5

    def test_distinct_ids_never_merge(self):
        svc = make_service()
        svc.ingest(helm_line(uid=1, seq=0), 1.0)
        svc.ingest(strap_line(uid=2, seq=0), 1.5)
        assert svc.unit(1)["hr_bpm"] is None
        assert svc.unit(2)["heading_deg"] is None

    def test_unknown_id_creates_unregistered_unit(self):
        svc = make_service()
        records = svc.ingest(helm_line(uid=9, seq=0), 1.0)
        assert svc.unit(9)["registered"] is False
        frame_record = [r for r in records if r.kind is LogKind.FRAME][0]
        assert frame_record.payload.get("unregistered") is True


class TestJournal:
    def test_every_line_produces_a_record(self):
        svc = make_service()
        for line, at in [(helm_line(), 1.0), ("###", 2.0), ("", 3.0), (strap_line(), 4.0)]:
            appended = svc.ingest(line, at)
            assert len(appended) >= 1

    def test_garbage_is_decode_error_and_state_unchanged(self):
        svc = make_service()
        before = svc.snapshot()["units"]
        records = svc.ingest("###", 2.0)
        assert [r.kind for r in records] == [LogKind.DECODE_ERROR]
        assert svc.snapshot()["units"] == before

    def test_range_violation_is_decode_error(self):
        svc = make_service()
        records = svc.ingest("S,1,0,80,80,101,36.60", 2.0)
        assert [r.kind for r in records] == [LogKind.DECODE_ERROR]
        assert records[0].payload["error"] == "RangeViolation"

    def test_stale_seq_dropped(self):
        svc = make_service()
        svc.ingest(strap_line(seq=5, hr=90), 1.0)
        records = svc.ingest(strap_line(seq=5, hr=200), 2.0)
        assert records[0].payload["dropped"] == "stale-seq"
        assert svc.unit(1)["hr_bpm"] == 90  # state never moves backward

    def test_records_are_time_ordered(self):
        svc = make_service()
        svc.ingest(helm_line(seq=0), 1.0)
        svc.ingest(strap_line(seq=0), 1.2)
        svc.advance(5.0)
        ats = [r.at for r in svc.records()]
        assert ats == sorted(ats)

    def test_log_since_pagination(self):
        svc = make_service()
        svc.ingest(helm_line(seq=0), 1.0)
        svc.ingest(strap_line(seq=0), 2.0)
        first, total = svc.log_since(0)
        assert len(first) == total == 2
        rest, total2 = svc.log_since(1)
        assert len(rest) == 1 and total2 == 2


class TestAlerts:
    def test_body_crit_record(self):
        svc = make_service()
        records = svc.ingest(strap_line(seq=0, body=40.5), 3.0)
        kinds = [r.payload.get("kind") for r in records if r.kind is LogKind.ALERT]
        assert "BODY_TEMP_WARN" in kinds and "BODY_TEMP_CRIT" in kinds

    def test_snapshot_stress_matches_vitals(self):
        svc = make_service()
        svc.ingest(strap_line(seq=0, hr=130, spo2=91.0, body=38.6), 1.0)
        unit = svc.unit(1)
        expected = compute_stress(unit["hr_bpm"], unit["spo2_pct"], unit["body_c"],
                                  svc.config.thresholds)
        assert unit["stress"]["total"] == expected.total

    def test_jerk_alert_from_helm_accel(self):
        svc = make_service()
        records = svc.ingest(helm_line(seq=0, accel=(35.0, 0.0, 0.0)), 1.0)
        kinds = [r.payload.get("kind") for r in records if r.kind is LogKind.ALERT]
        assert kinds == ["JERK"]

    def test_offline_then_back_online(self):
        svc = make_service()
        svc.ingest(helm_line(seq=0), 1.0)
        svc.ingest(strap_line(seq=0), 1.0)
        assert [r for r in svc.advance(5.0)] == []
        offline = svc.advance(12.0)
        assert [r.payload["kind"] for r in offline] == ["OFFLINE"]
        assert svc.unit(1)["offline"] is True
        back = svc.ingest(helm_line(seq=1), 13.0)
        kinds = [r.payload.get("kind") for r in back if r.kind is LogKind.ALERT]
        assert kinds == ["BACK_ONLINE"]
        assert svc.unit(1)["offline"] is False

    def test_unit_offline_only_when_both_devices_stale(self):
        svc = make_service()
        svc.ingest(helm_line(seq=0), 1.0)
        svc.ingest(strap_line(seq=0), 1.0)
        svc.ingest(helm_line(seq=1), 8.0)  # helm still fresh at t=12
        assert svc.advance(12.0) == []
        assert svc.unit(1)["offline"] is False

    def test_never_seen_unit_stays_quiet(self):
        svc = make_service()
        assert svc.advance(100.0) == []
        assert svc.unit(2)["offline"] is False


class TestLossEstimate:
    def test_matches_brute_force_count(self):
        svc = make_service()
        received = [0, 2, 3, 7, 9]
        for seq in received:
            svc.ingest(strap_line(seq=seq), float(seq))
        unit = svc.unit(1)
        assert unit["strap_rx"] == len(received)
        assert unit["strap_loss"] == pytest.approx(1 - len(received) / 10)
        assert unit["loss_estimate"] == pytest.approx(1 - len(received) / 10)


class TestRecall:
    def test_pending_then_red_after_grace(self):
        sent = []
        svc = make_service(command_sink=lambda line, at, air: sent.append((line, at, air)))
        svc.ingest(helm_line(seq=0), 1.0)
        frame = svc.send_recall(1, at=2.0)
        assert frame.target == 1
        assert sent and sent[0][0] == "C,1,LED_RED"
        assert svc.unit(1)["led"] == "PENDING"
        svc.advance(3.0)
        assert svc.unit(1)["led"] == "PENDING"
        records = svc.advance(5.0)  # grace is airtime + 2 s
        assert svc.unit(1)["led"] == "RED"
        command_records = [r for r in records if r.kind is LogKind.COMMAND]
        assert command_records[0].payload["confirmed"] is False

    def test_unknown_unit_rejected(self):
        svc = make_service()
        with pytest.raises(UnknownUnit):
            svc.send_recall(42)

    def test_roster_unit_recallable_before_first_frame(self):
        svc = make_service(command_sink=lambda *a: None)
        svc.send_recall(2, at=1.0)
        assert svc.unit(2)["led"] == "PENDING"


class TestBoundaries:
    def test_create_generates_fence_events_on_later_frames(self):
        svc = make_service()
        svc.create_boundary(DraftBoundary(name="zone", vertices=(
            GeoPoint(40.0004, -88.0001), GeoPoint(40.0004, -87.9999),
            GeoPoint(40.0006, -87.9999), GeoPoint(40.0006, -88.0001))))
        records = svc.ingest(helm_line(seq=0, lat=40.0005, lon=-88.0), 1.0)
        fence = [r for r in records if r.kind is LogKind.GEOFENCE]
        assert len(fence) == 1
        assert fence[0].payload["kind"] == "ENTER"
        assert fence[0].payload["boundary_name"] == "zone"

    def test_no_fix_freezes_membership(self):
        svc = make_service()
        svc.create_boundary(DraftBoundary(name="zone", vertices=(
            GeoPoint(40.0004, -88.0001), GeoPoint(40.0004, -87.9999),
            GeoPoint(40.0006, -87.9999), GeoPoint(40.0006, -88.0001))))
        svc.ingest(helm_line(seq=0, lat=40.0005, lon=-88.0), 1.0)
        records = svc.ingest(helm_line(seq=1, lat=40.1, lon=-88.0, fix=False), 2.0)
        assert [r for r in records if r.kind is LogKind.GEOFENCE] == []

    def test_rejection_propagates(self):
        svc = make_service()
        with pytest.raises(DraftRejected):
            svc.create_boundary(DraftBoundary(name="", vertices=(
                GeoPoint(0, 0), GeoPoint(0, 1), GeoPoint(1, 0))))

    def test_delete_logs_change(self):
        svc = make_service()
        boundary = svc.create_boundary(DraftBoundary(name="zone", vertices=(
            GeoPoint(0, 0), GeoPoint(0, 1), GeoPoint(1, 0))))
        svc.delete_boundary(boundary.boundary_id)
        changes = [r for r in svc.records() if r.kind is LogKind.BOUNDARY_CHANGE]
        assert [c.payload["action"] for c in changes] == ["created", "deleted"]
        with pytest.raises(KeyError):
            svc.delete_boundary(boundary.boundary_id)


class TestReplay:
    def test_replay_regenerates_alert_and_fence_records(self, tmp_path):
        log_path = tmp_path / "run.jsonl"
        config = IncidentConfig(origin=GeoPoint(40.0, -88.0), roster=(1,), tick_s=1.0)
        manifest = {"format": 1, "scenario": "mini", "seed": 0,
                    "duration_s": 30.0, "tick_s": 1.0, "config": config.to_dict()}
        writer = LogWriter(log_path, manifest)
        svc = MissionService(config, writer=writer)
        svc.create_boundary(DraftBoundary(name="zone", vertices=(
            GeoPoint(40.0004, -88.0001), GeoPoint(40.0004, -87.9999),
            GeoPoint(40.0006, -87.9999), GeoPoint(40.0006, -88.0001))))
        for grid_t in tick_grid(30.0, 1.0):
            t = grid_t
            if 1.0 <= t <= 6.0:
                svc.ingest(helm_line(seq=int(t), lat=40.0005), t - 0.5)
                svc.ingest(strap_line(seq=int(t), body=36.0 + t), t - 0.4)
            svc.advance(t)  # unit goes stale after t=6, OFFLINE fires mid-run
        writer.close()

        result = replay_log(log_path)
        assert result.matches
        original_kinds = [r.payload.get("kind") for r in result.original if r.kind is LogKind.ALERT]
        assert "BODY_TEMP_WARN" in original_kinds
        assert "BODY_TEMP_CRIT" in original_kinds
        assert "OFFLINE" in original_kinds

    def test_read_log_round_trip(self, tmp_path):
        log_path = tmp_path / "x.jsonl"
        writer = LogWriter(log_path, {"scenario": "s", "tick_s": 1.0, "duration_s": 1.0})
        svc = MissionService(IncidentConfig(), writer=writer)
        svc.ingest(strap_line(), 0.5)
        writer.close()
        manifest, records = read_log(log_path)
        assert manifest["scenario"] == "s"
        assert len(records) == 1
        assert records[0].kind is LogKind.FRAME


class TestSnapshot:
    def test_contains_units_boundaries_recent_events(self):
        svc = make_service()
        svc.create_boundary(DraftBoundary(name="zone", vertices=(
            GeoPoint(0, 0), GeoPoint(0, 1), GeoPoint(1, 0))))
        svc.ingest(strap_line(seq=0, body=40.5), 1.0)
        snap = svc.snapshot()
        assert {u["id"] for u in snap["units"]} == {1, 2}
        assert snap["boundaries"][0]["name"] == "zone"
        assert any(e["kind"] == "ALERT" for e in snap["recent_events"])

    def test_snapshot_is_a_copy(self):
        svc = make_service()
        snap = svc.snapshot()
        snap["units"].append({"bogus": True})
        assert len(svc.snapshot()["units"]) == 2
