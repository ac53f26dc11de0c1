#!/usr/bin/env python3
"""Regenerates the reference fixture corpus under fixtures/.

Everything is deterministic arithmetic; no randomness. The fleet corpus is
designed so that classification reproduces the reference event-count matrix
exactly, and the human corpora plus exposure/cell tables are designed so the
benchmark stage lands on the reference rate table at display precision.
The script asserts the achieved display values before writing anything.

Run from the repository root:  python3 tools/gen_fixtures.py
"""

import csv
import os

OUT = os.path.join(os.path.dirname(__file__), "..", "fixtures")

UNDERREPORTING = 1.47
VM4_SHARE = 0.9375

# Per-location design: human cell miles, ADS cell miles (both millions),
# per-outcome human crash counts per cell, and per-type observed counts.
# Outcome keys: air = any-injury-reported, ab = airbag deployment,
# ssi = suspected serious injury+, pdo = property-damage-only extras.
TYPES = [
    "cyclist", "motorcycle", "pedestrian", "secondary_crash",
    "single_vehicle", "v2v_backing", "v2v_f2r", "v2v_opposite_direction",
    "v2v_intersection", "v2v_lateral", "other",
]

LOCATIONS = {
    "Phoenix": {
        "human_cell_miles": [30.0, 20.0, 10.0],
        "ads_cell_miles": [20.0, 8.0, 3.159],
        "cells": ["phx:core", "phx:mid", "phx:edge"],
        "air_cells": [46, 24, 13],
        "ab_cells": [46, 24, 13],
        "ssi_cells": [4, 2, 1],
        "air_types": {"cyclist": 2, "motorcycle": 2, "pedestrian": 3,
                      "secondary_crash": 7, "single_vehicle": 5,
                      "v2v_f2r": 17, "v2v_opposite_direction": 2,
                      "v2v_intersection": 39, "v2v_lateral": 5, "other": 1},
        "ab_types": {"secondary_crash": 7, "single_vehicle": 6, "v2v_f2r": 14,
                     "v2v_opposite_direction": 3, "v2v_intersection": 47,
                     "v2v_lateral": 4, "other": 2},
        "ssi_types": {"secondary_crash": 2, "v2v_f2r": 1,
                      "v2v_intersection": 3, "single_vehicle": 1},
        "pdo": 56,
        "unknown_pdo": 2,
        "display": {"air": "2.09", "ab": "1.42", "ssi": "0.12"},
    },
    "San Francisco": {
        "human_cell_miles": [15.0, 10.0, 5.0],
        "ads_cell_miles": [13.0, 4.0, 1.26],
        "cells": ["sf:core", "sf:mid", "sf:edge"],
        "air_cells": [92, 41, 14],
        "ab_cells": [41, 14, 4],
        "ssi_cells": [8, 3, 1],
        "air_types": {"cyclist": 15, "motorcycle": 10, "pedestrian": 20,
                      "secondary_crash": 6, "single_vehicle": 10,
                      "v2v_backing": 2, "v2v_f2r": 18,
                      "v2v_opposite_direction": 1, "v2v_intersection": 52,
                      "v2v_lateral": 10, "other": 3},
        "ab_types": {"secondary_crash": 3, "single_vehicle": 9,
                     "v2v_backing": 1, "v2v_f2r": 5,
                     "v2v_opposite_direction": 1, "v2v_intersection": 34,
                     "v2v_lateral": 4, "other": 2},
        "ssi_types": {"secondary_crash": 3, "v2v_intersection": 5,
                      "v2v_f2r": 2, "pedestrian": 1, "single_vehicle": 1},
        "pdo": 53,
        "unknown_pdo": 2,
        "display": {"air": "8.02", "ab": "2.31", "ssi": "0.46"},
    },
    "Los Angeles": {
        "human_cell_miles": [12.0, 8.0, 4.0],
        "ads_cell_miles": [3.5, 2.0, 0.948],
        "cells": ["la:core", "la:mid", "la:edge"],
        "air_cells": [22, 12, 4],
        "ab_cells": [16, 9, 3],
        "ssi_cells": [3, 0, 0],
        "air_types": {"cyclist": 2, "motorcycle": 1, "pedestrian": 2,
                      "secondary_crash": 3, "single_vehicle": 2,
                      "v2v_f2r": 6, "v2v_opposite_direction": 1,
                      "v2v_intersection": 17, "v2v_lateral": 3, "other": 1},
        "ab_types": {"secondary_crash": 2, "single_vehicle": 4, "v2v_f2r": 3,
                     "v2v_opposite_direction": 1, "v2v_intersection": 15,
                     "v2v_lateral": 2, "other": 1},
        "ssi_types": {"v2v_intersection": 2, "secondary_crash": 1},
        "pdo": 40,
        "unknown_pdo": 2,
        "display": {"air": "2.36", "ab": "1.18", "ssi": "0.14"},
    },
    "Austin": {
        "human_cell_miles": [3.0, 2.0, 1.0],
        "ads_cell_miles": [0.5, 0.25, 0.084],
        "cells": ["atx:core", "atx:mid", "atx:edge"],
        "air_cells": [6, 3, 2],
        "ab_cells": [7, 4, 1],
        "ssi_cells": [1, 1, 0],
        "air_types": {"v2v_f2r": 3, "v2v_intersection": 4,
                      "secondary_crash": 1, "single_vehicle": 1,
                      "v2v_lateral": 1, "cyclist": 1},
        "ab_types": {"v2v_intersection": 6, "v2v_f2r": 3,
                     "single_vehicle": 2, "secondary_crash": 1},
        "ssi_types": {"v2v_intersection": 1, "secondary_crash": 1},
        "pdo": 16,
        "unknown_pdo": 2,
        "display": {"air": "2.72", "ab": "2.10", "ssi": "0.35"},
    },
}

BLENDED_DISPLAY = {"air": "4.04", "ab": "1.69", "ssi": "0.24"}


def dynamic_rate(counts, human_miles, ads_miles):
    """ADS-mile-share weighted average of per-cell rates, IPMM."""
    total_ads = sum(ads_miles)
    return sum(
        (c / m) * (a / total_ads)
        for c, m, a in zip(counts, human_miles, ads_miles)
    )


def verify_design():
    rates = {}
    for name, loc in LOCATIONS.items():
        hm, am = loc["human_cell_miles"], loc["ads_cell_miles"]
        air = dynamic_rate(loc["air_cells"], hm, am) * UNDERREPORTING
        ab = dynamic_rate(loc["ab_cells"], hm, am)
        ssi = dynamic_rate(loc["ssi_cells"], hm, am)
        rates[name] = {"air": air, "ab": ab, "ssi": ssi}
        for key in ("air", "ab", "ssi"):
            shown = f"{rates[name][key]:.2f}"
            assert shown == loc["display"][key], (name, key, shown)
        assert sum(loc["air_types"].values()) == sum(loc["air_cells"])
        assert sum(loc["ab_types"].values()) == sum(loc["ab_cells"])
        assert sum(loc["ssi_types"].values()) == sum(loc["ssi_cells"])
    total_ads = sum(sum(l["ads_cell_miles"]) for l in LOCATIONS.values())
    for key in ("air", "ab", "ssi"):
        blended = sum(
            rates[name][key] * sum(loc["ads_cell_miles"])
            for name, loc in LOCATIONS.items()
        ) / total_ads
        shown = f"{blended:.2f}"
        assert shown == BLENDED_DISPLAY[key], (key, shown)
    print("design verified: per-location and blended displays match")
    for name, r in rates.items():
        print(f"  {name}: air={r['air']:.5f} ab={r['ab']:.5f} ssi={r['ssi']:.5f}")


# --- human corpora ---------------------------------------------------------

# State vocabularies: canonical concept -> source token.
AZ = {
    "partner": {"passenger_vehicle": "PASSENGER CAR", "pedestrian": "PEDESTRIAN",
                "cyclist": "PEDALCYCLE", "motorcycle": "MOTORCYCLE",
                "fixed_object_or_ground": "FIXED OBJECT", None: ""},
    "config": {"v2v_f2r": "REAR END", "v2v_intersection": "ANGLE",
               "v2v_opposite_direction": "HEAD ON",
               "v2v_lateral": "SIDESWIPE SAME DIRECTION",
               "v2v_backing": "BACKING", "single_vehicle": "SINGLE VEHICLE",
               "other": "OTHER", "secondary_crash": "REAR END",
               "cyclist": "ANGLE", "motorcycle": "ANGLE", "pedestrian": "ANGLE"},
    "severity": {"K": "FATAL", "A": "SUSPECTED SERIOUS INJURY",
                 "B": "SUSPECTED MINOR INJURY", "C": "POSSIBLE INJURY",
                 "none": "NO INJURY"},
    "airbag": {True: "YES", False: "NO"},
}

CA = {
    "partner": {"passenger_vehicle": "A", "pedestrian": "N", "cyclist": "L",
                "motorcycle": "C", "fixed_object_or_ground": "X", None: ""},
    "config": {"v2v_f2r": "C", "v2v_intersection": "D",
               "v2v_opposite_direction": "A", "v2v_lateral": "B",
               "v2v_backing": "H", "single_vehicle": "E", "other": "H",
               "secondary_crash": "C", "cyclist": "D", "motorcycle": "D",
               "pedestrian": "G"},
    "severity": {"K": "1", "A": "2", "B": "3", "C": "4", "none": "0"},
    "airbag": {True: "L", False: "M"},
}

TX = {
    "partner": {"passenger_vehicle": "PASSENGER CAR", "pedestrian": "PEDESTRIAN",
                "cyclist": "PEDALCYCLIST", "motorcycle": "MOTORCYCLE",
                "fixed_object_or_ground": "FIXED OBJECT", None: ""},
    "config": {"v2v_f2r": "SAME DIRECTION - REAR END",
               "v2v_intersection": "ANGLE - BOTH GOING STRAIGHT",
               "v2v_opposite_direction": "OPPOSITE DIRECTION - HEAD ON",
               "v2v_lateral": "SAME DIRECTION - SIDESWIPE",
               "v2v_backing": "BACKING COLLISION",
               "single_vehicle": "ONE MOTOR VEHICLE - GOING STRAIGHT",
               "other": "OTHER", "secondary_crash": "SAME DIRECTION - REAR END",
               "cyclist": "ANGLE - BOTH GOING STRAIGHT",
               "motorcycle": "ANGLE - BOTH GOING STRAIGHT",
               "pedestrian": "PEDESTRIAN COLLISION"},
    "severity": {"K": "K - FATAL INJURY", "A": "A - SUSPECTED SERIOUS INJURY",
                 "B": "B - SUSPECTED MINOR INJURY", "C": "C - POSSIBLE INJURY",
                 "none": "N - NOT INJURED"},
    "airbag": {True: "DEPLOYED, FRONT", False: "NOT DEPLOYED"},
}

# Partner body class used for each crash type in the human corpora.
TYPE_PARTNER = {
    "cyclist": "cyclist", "motorcycle": "motorcycle", "pedestrian": "pedestrian",
    "secondary_crash": "passenger_vehicle", "single_vehicle": "fixed_object_or_ground",
    "v2v_backing": "passenger_vehicle", "v2v_f2r": "passenger_vehicle",
    "v2v_opposite_direction": "passenger_vehicle",
    "v2v_intersection": "passenger_vehicle", "v2v_lateral": "passenger_vehicle",
    "other": "passenger_vehicle",
}


def human_rows(location, vocab, prefix, subject_ok, subject_unknown):
    """Builds (per-record) source rows for one location's corpus."""
    loc = LOCATIONS[location]
    rows = []
    counter = [0]

    def emit(crash_type, severity, airbag, confirmed_serious):
        counter[0] += 1
        seq = "2" if crash_type == "secondary_crash" else "1"
        rows.append({
            "id": f"{prefix}-{counter[0]:04d}",
            "subject": subject_ok[counter[0] % len(subject_ok)],
            "type": crash_type,
            "partner": vocab["partner"][TYPE_PARTNER[crash_type]],
            "config": vocab["config"][crash_type],
            "seq": seq,
            "severity": vocab["severity"][severity],
            "airbag": vocab["airbag"][airbag],
        })

    air = dict(loc["air_types"])
    ab = dict(loc["ab_types"])
    ssi = dict(loc["ssi_types"])
    for crash_type in TYPES:
        n_air = air.get(crash_type, 0)
        n_ab = ab.get(crash_type, 0)
        n_ssi = ssi.get(crash_type, 0)
        both = min(n_air, n_ab)
        air_only = n_air - both
        ab_only = n_ab - both
        # Serious records sit inside the injured set, airbag-first.
        remaining_ssi = n_ssi
        for i in range(both):
            serious = remaining_ssi > 0
            if serious:
                remaining_ssi -= 1
            severity = ("K" if serious and i == 0 else "A") if serious else \
                ("C" if i % 3 else "B")
            emit(crash_type, severity, True, serious)
        for i in range(air_only):
            serious = remaining_ssi > 0
            if serious:
                remaining_ssi -= 1
            severity = "A" if serious else ("C" if i % 3 else "B")
            emit(crash_type, severity, False, serious)
        assert remaining_ssi == 0, (location, crash_type)
        for _ in range(ab_only):
            emit(crash_type, "none", True, False)
    for i in range(loc["pdo"]):
        emit(TYPES[i % len(TYPES)], "none", False, False)
    # Unknown-vehicle-type rows: kept with the config's imputation weight;
    # property-damage-only so the injury-outcome counts stay integral.
    for _ in range(loc["unknown_pdo"]):
        counter[0] += 1
        rows.append({
            "id": f"{prefix}-{counter[0]:04d}",
            "subject": subject_unknown,
            "type": "v2v_f2r",
            "partner": vocab["partner"]["passenger_vehicle"],
            "config": vocab["config"]["v2v_f2r"],
            "seq": "1",
            "severity": vocab["severity"]["none"],
            "airbag": vocab["airbag"][False],
        })
    return rows


def write_az():
    rows = human_rows("Phoenix", AZ, "AZ", ["PASSENGER CAR", "SPORT UTILITY", "PICKUP"], "UNKNOWN")
    path = os.path.join(OUT, "az_crashes.csv")
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["Incident_ID", "County", "Unit_Type", "Unit_Action",
                    "On_Road_Class", "Collision_Manner", "Event_Sequence",
                    "Partner_Type", "Injury_Status", "Airbag_Deployed"])
        for r in rows:
            w.writerow([r["id"], "MARICOPA", r["subject"], "DRIVING",
                        "CITY STREET", r["config"], r["seq"], r["partner"],
                        r["severity"], r["airbag"]])
        # Rows exercising the drop rules.
        w.writerow(["AZ-9001", "MARICOPA", "PASSENGER CAR", "DRIVING",
                    "INTERSTATE", "REAR END", "1", "PASSENGER CAR",
                    "POSSIBLE INJURY", "NO"])
        w.writerow(["AZ-9002", "MARICOPA", "PASSENGER CAR", "PARKED OFF ROADWAY",
                    "CITY STREET", "OTHER", "1", "PASSENGER CAR",
                    "NO INJURY", "NO"])
        w.writerow(["AZ-9003", "MARICOPA", "TRUCK TRACTOR", "DRIVING",
                    "CITY STREET", "REAR END", "1", "PASSENGER CAR",
                    "POSSIBLE INJURY", "NO"])
    return path


def write_ca(county, location, prefix):
    rows = human_rows(location, CA, prefix, ["A", "D"], "O")
    path = os.path.join(OUT, f"{prefix.lower()}_crashes.csv")
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["Case_ID", "County", "Chp_Beat_Type", "Stwd_Vehicle_Type",
                    "Move_Pre_Acc", "Type_Of_Collision", "Event_Number",
                    "Party2_Stwd_Vehicle_Type", "Collision_Severity",
                    "Party_Safety_Equip"])
        for r in rows:
            w.writerow([r["id"], county, "CITY STREET", r["subject"],
                        "PROCEEDING STRAIGHT", r["config"], r["seq"],
                        r["partner"], r["severity"], r["airbag"]])
        w.writerow([f"{prefix}-9001", county, "INTERSTATE", "A",
                    "PROCEEDING STRAIGHT", "C", "1", "A", "4", "M"])
        w.writerow([f"{prefix}-9002", county, "CITY STREET", "A", "PARKED",
                    "H", "1", "A", "0", "M"])
        w.writerow([f"{prefix}-9003", county, "CITY STREET", "E",
                    "PROCEEDING STRAIGHT", "C", "1", "A", "4", "M"])
    return path


def write_tx():
    rows = human_rows("Austin", TX, "TX", ["PASSENGER CAR, 4-DOOR", "SPORT UTILITY VEHICLE"], "UNKNOWN")
    path = os.path.join(OUT, "tx_crashes.csv")
    counties = ["TRAVIS", "TRAVIS", "HAYS", "WILLIAMSON"]
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["Crash_ID", "Cnty_ID", "Veh_Body_Styl_ID", "Veh_Parked_Fl",
                    "Cmv_Fiveton_Fl", "Rpt_Rdwy_Sys_ID", "FHE_Collsn_ID",
                    "Event_Seq", "Other_Unit_Desc", "Crash_Sev_ID",
                    "Prsn_Airbag_ID"])
        for i, r in enumerate(rows):
            w.writerow([r["id"], counties[i % len(counties)], r["subject"], "N",
                        "N", "CITY STREET", r["config"], r["seq"], r["partner"],
                        r["severity"], r["airbag"]])
        w.writerow(["TX-9001", "TRAVIS", "PASSENGER CAR, 4-DOOR", "N", "N",
                    "INTERSTATE", "SAME DIRECTION - REAR END", "1",
                    "PASSENGER CAR", "C - POSSIBLE INJURY", "NOT DEPLOYED"])
        w.writerow(["TX-9002", "TRAVIS", "TRUCK TRACTOR", "N", "Y",
                    "CITY STREET", "SAME DIRECTION - REAR END", "1",
                    "PASSENGER CAR", "C - POSSIBLE INJURY", "NOT DEPLOYED"])
    return path


def write_exposure():
    with open(os.path.join(OUT, "az_exposure.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["County", "Functional_Class", "Annual_VMT"])
        w.writerow(["MARICOPA", "CITY STREET", "40000000"])
        w.writerow(["MARICOPA", "MINOR ARTERIAL", "16000000"])
        w.writerow(["MARICOPA", "COLLECTOR", "8000000"])
        w.writerow(["MARICOPA", "INTERSTATE", "20000000"])
        w.writerow(["MARICOPA",
                    "OTHER ARTERIALS - OTHER FREEWAYS AND EXPRESSWAYS",
                    "16000000"])
    with open(os.path.join(OUT, "ca_exposure.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["County", "Functional_Class", "Annual_VMT"])
        w.writerow(["SAN FRANCISCO", "CITY STREET", "20000000"])
        w.writerow(["SAN FRANCISCO", "MINOR ARTERIAL", "8000000"])
        w.writerow(["SAN FRANCISCO", "COLLECTOR", "4000000"])
        w.writerow(["SAN FRANCISCO", "INTERSTATE", "6000000"])
        w.writerow(["LOS ANGELES", "CITY STREET", "15000000"])
        w.writerow(["LOS ANGELES", "MINOR ARTERIAL", "7000000"])
        w.writerow(["LOS ANGELES", "COLLECTOR", "3600000"])
        w.writerow(["LOS ANGELES", "INTERSTATE", "30000000"])
    with open(os.path.join(OUT, "tx_exposure.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["County", "Functional_Class", "Annual_VMT"])
        w.writerow(["TRAVIS", "CITY STREET", "4000000"])
        w.writerow(["HAYS", "CITY STREET", "1400000"])
        w.writerow(["WILLIAMSON", "CITY STREET", "1000000"])
        w.writerow(["TRAVIS", "INTERSTATE", "2000000"])


def write_cells():
    path = os.path.join(OUT, "cells.csv")
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["location", "cell_id", "human_miles",
                    "human_crashes_any_property_damage_or_injury",
                    "human_crashes_police_reported",
                    "human_crashes_any_injury_reported",
                    "human_crashes_airbag_deployment",
                    "human_crashes_suspected_serious_injury_plus",
                    "ads_miles"])
        for name, loc in LOCATIONS.items():
            # Every corpus record is in police data, so the any-property and
            # police-reported cell counts cover the whole (weighted) corpus.
            air, ab, ssi = loc["air_types"], loc["ab_types"], loc["ssi_types"]
            both = sum(min(air.get(t, 0), ab.get(t, 0)) for t in TYPES)
            flagged = sum(air.values()) + sum(ab.values()) - both
            unknown_weight = {"Phoenix": 0.89, "San Francisco": 0.89,
                              "Los Angeles": 0.93, "Austin": 0.94}[name]
            total = flagged + loc["pdo"] + loc["unknown_pdo"] * unknown_weight
            shares = [m / sum(loc["human_cell_miles"])
                      for m in loc["human_cell_miles"]]
            for i, cell in enumerate(loc["cells"]):
                last = i == len(loc["cells"]) - 1
                # Split the all-record count by mile share, exact in total.
                if not last:
                    portion = round(total * shares[i], 6)
                else:
                    portion = round(total - sum(
                        round(total * shares[j], 6)
                        for j in range(len(shares) - 1)), 6)
                w.writerow([
                    name, cell,
                    f"{loc['human_cell_miles'][i] * 1e6:.0f}",
                    portion, portion,
                    loc["air_cells"][i], loc["ab_cells"][i],
                    loc["ssi_cells"][i],
                    f"{loc['ads_cell_miles'][i] * 1e6:.0f}",
                ])
    return path


# --- fleet corpus ----------------------------------------------------------

SGO_HEADER = [
    "Report ID", "City", "Highest Injury Severity Alleged",
    "SV Any Air Bags Deployed?", "CP Any Air Bags Deployed?", "Roadway Type",
    "Latitude", "Longitude", "Narrative", "Ann Airbag Any Vehicle",
    "Ann Police Confirmed Max Severity", "Ann In Transport", "Ann Impact",
    "Ann Narrative Injury Mention", "Ann Police Reported",
    "Ann Sequence Position", "Ann Partner Body Class", "Ann Configuration",
    "Ann F2R Role", "Ann Initiator Role", "Ann Stopped Duration S",
    "Ann Peak Decel MPS2",
]

CITY = {"Phoenix": ("Phoenix", 33.45, -112.07),
        "San Francisco": ("San Francisco", 37.77, -122.42),
        "Los Angeles": ("Los Angeles", 34.05, -118.24),
        "Austin": ("Austin", 30.27, -97.74)}

KINEMATICS = {"stopped": ("10.0", "0.2"), "const": ("0.0", "0.5"),
              "moderate": ("0.0", "2.0"), "hard": ("0.0", "4.2")}


def sgo_rows():
    rows = []
    counter = [0]

    def emit(location, crash_type, severity, sv_airbag, manual_airbag,
             confirmed="", narrative_injury="no", partner="passenger_vehicle",
             config="other_or_unknown", seq="1", f2r_role="", initiator="",
             kinematics=None, police="no", narrative="routine operation"):
        counter[0] += 1
        city, lat, lon = CITY[location]
        stopped, decel = KINEMATICS[kinematics] if kinematics else ("", "")
        rows.append([
            f"SGO-{counter[0]:04d}", city, severity,
            "Yes" if sv_airbag else "No", "No", "Street",
            f"{lat + (counter[0] % 7) * 1e-3:.4f}",
            f"{lon - (counter[0] % 5) * 1e-3:.4f}",
            narrative, "yes" if manual_airbag else "no", confirmed,
            "yes", "yes", narrative_injury, police, seq,
            partner, config, f2r_role, initiator, stopped, decel,
        ])

    def f2r(location, n_both, both_kin, n_air_only, air_only_kin):
        for kin in both_kin[:n_both]:
            emit(location, "v2v_f2r", "Minor", True, False,
                 config="front_to_rear", f2r_role="struck",
                 initiator="responder", kinematics=kin, police="yes")
        for i, kin in enumerate(air_only_kin[:n_air_only]):
            severity = "Minor"
            narrative_injury = "no"
            if location == "San Francisco" and i == 0:
                severity = "Unknown"
                narrative_injury = "yes"
            emit(location, "v2v_f2r", severity, False, False,
                 config="front_to_rear", f2r_role="struck",
                 initiator="responder", kinematics=kin,
                 narrative_injury=narrative_injury,
                 police="yes" if i % 2 else "no")

    # Phoenix: 24 any-injury (2 motorcycle, 1 secondary, 15 f2r struck,
    # 1 opposite-direction, 3 intersection, 2 lateral), 8 airbag.
    emit("Phoenix", "motorcycle", "Minor", False, False, partner="motorcycle",
         config="lateral_same_direction", initiator="responder", police="yes")
    emit("Phoenix", "motorcycle", "Minor", False, False, partner="motorcycle",
         config="front_to_rear", initiator="responder")
    emit("Phoenix", "secondary", "Minor", False, False, seq="2",
         config="front_to_rear", initiator="responder", police="yes")
    f2r("Phoenix", 5, ["stopped", "stopped", "stopped", "stopped", "const"],
        10, ["const", "moderate", "moderate", "moderate", "moderate",
             "moderate", "moderate", "hard", "hard", "hard"])
    emit("Phoenix", "oppdir", "Moderate", True, False,
         config="opposite_direction", initiator="responder", police="yes")
    emit("Phoenix", "intersection", "Minor", True, False,
         config="intersection_turning_or_crossing", initiator="responder",
         police="yes")
    emit("Phoenix", "intersection", "Minor", True, False,
         config="intersection_turning_or_crossing", initiator="responder",
         police="yes")
    emit("Phoenix", "intersection", "Minor", False, False,
         config="intersection_turning_or_crossing", initiator="responder")
    emit("Phoenix", "lateral", "Minor", False, False,
         config="lateral_same_direction", initiator="responder", police="yes")
    emit("Phoenix", "lateral", "Minor", False, False,
         config="lateral_same_direction", initiator="unknown")

    # San Francisco: 16 any-injury, 7 airbag, 2 suspected serious.
    emit("San Francisco", "cyclist", "Minor", False, False, partner="cyclist",
         config="intersection_turning_or_crossing", initiator="responder",
         police="yes")
    emit("San Francisco", "cyclist", "Minor", False, False, partner="cyclist",
         config="other_or_unknown", initiator="responder")
    emit("San Francisco", "pedestrian", "Minor", False, False,
         partner="pedestrian", config="other_or_unknown",
         initiator="responder", police="yes")
    # Fatal chain collision: struck from behind while stopped in a queue.
    emit("San Francisco", "secondary", "Fatality", False, True, confirmed="K",
         seq="2", config="front_to_rear", initiator="responder", police="yes",
         narrative="struck in a chain collision while stopped in a queue")
    # Red-light runner redirected into the subject; pedestrian injured.
    emit("San Francisco", "secondary", "Serious", False, False, confirmed="A",
         seq="2", config="intersection_turning_or_crossing",
         initiator="responder", police="yes",
         narrative="red light runner struck an adjacent vehicle first")
    # Alleged serious; the police report confirmed a complaint of pain only.
    emit("San Francisco", "secondary", "Serious", False, False, confirmed="C",
         seq="2", config="lateral_same_direction", initiator="responder",
         police="yes",
         narrative="adjacent vehicle pushed into the subject; occupant taken to hospital")
    f2r("San Francisco", 1, ["stopped"],
        7, ["const", "moderate", "moderate", "moderate", "hard", "hard", "hard"])
    emit("San Francisco", "lateral", "Minor", True, False,
         config="lateral_same_direction", initiator="responder", police="yes")
    emit("San Francisco", "lateral", "Minor", False, False,
         config="lateral_same_direction", initiator="responder")
    # Airbag-only events (no injury reported).
    emit("San Francisco", "oppdir", "No Injuries", True, False,
         config="opposite_direction", initiator="responder", police="yes")
    emit("San Francisco", "intersection", "No Injuries", True, False,
         config="intersection_turning_or_crossing", initiator="responder",
         police="yes")
    # Airbag found only in the any-vehicle video review.
    emit("San Francisco", "intersection", "No Injuries", False, True,
         config="intersection_turning_or_crossing", initiator="responder")
    emit("San Francisco", "other", "No Injuries", True, False,
         config="other_or_unknown", initiator="unknown")

    # Los Angeles: 8 any-injury, 2 airbag.
    emit("Los Angeles", "cyclist", "Minor", False, False, partner="cyclist",
         config="other_or_unknown", initiator="responder")
    emit("Los Angeles", "pedestrian", "Minor", False, False,
         partner="pedestrian", config="other_or_unknown",
         initiator="responder", police="yes")
    emit("Los Angeles", "single", "Minor", False, False, partner="",
         config="single_vehicle", initiator="unknown")
    f2r("Los Angeles", 1, ["moderate"], 1, ["moderate"])
    emit("Los Angeles", "oppdir", "Minor", False, False,
         config="opposite_direction", initiator="responder", police="yes")
    emit("Los Angeles", "intersection", "Minor", False, False,
         config="intersection_turning_or_crossing", initiator="responder",
         police="yes")
    emit("Los Angeles", "other", "Minor", False, False,
         config="other_or_unknown", initiator="unknown")
    emit("Los Angeles", "secondary", "No Injuries", True, False, seq="2",
         config="front_to_rear", initiator="responder", police="yes")

    # Austin: one airbag-only intersection event.
    emit("Austin", "intersection", "No Injuries", True, False,
         config="intersection_turning_or_crossing", initiator="responder",
         police="yes")

    # Property-damage-only events.
    emit("Phoenix", "backing", "No Injuries", False, False, config="backing",
         initiator="initiator")
    emit("San Francisco", "f2r-pdo", "No Injuries", False, False,
         config="front_to_rear", f2r_role="struck", kinematics="stopped")

    # Rows the ingest stage must drop and tally.
    city, lat, lon = CITY["Phoenix"]
    rows.append(["SGO-9001", city, "No Injuries", "No", "No", "Street",
                 f"{lat}", f"{lon}", "parked in a designated space", "no", "",
                 "no", "yes", "no", "no", "1", "passenger_vehicle",
                 "other_or_unknown", "", "", "", ""])
    rows.append(["SGO-9002", city, "Minor", "No", "No", "Highway / Freeway",
                 f"{lat}", f"{lon}", "freeway operation", "no", "", "yes",
                 "yes", "no", "yes", "1", "passenger_vehicle",
                 "front_to_rear", "struck", "responder", "", ""])
    rows.append(["SGO-9003", city, "No Injuries", "No", "No", "Street",
                 f"{lat}", f"{lon}", "no contact event", "no", "", "yes",
                 "no", "no", "no", "1", "passenger_vehicle",
                 "other_or_unknown", "", "", "", ""])
    return rows


def write_sgo():
    path = os.path.join(OUT, "sgo_ads.csv")
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(SGO_HEADER)
        for row in sgo_rows():
            w.writerow(row)
    return path


def verify_sgo(rows):
    """Recomputes the event-count matrix the classifier should produce."""
    air = ab = ssi = 0
    by_loc_air = {}
    by_loc_ab = {}
    for row in rows:
        record = dict(zip(SGO_HEADER, row))
        if record["Ann In Transport"] != "yes" or record["Ann Impact"] != "yes":
            continue
        if record["Roadway Type"] != "Street":
            continue
        injury = record["Highest Injury Severity Alleged"] in (
            "Minor", "Moderate", "Serious", "Fatality") or (
            record["Highest Injury Severity Alleged"] == "Unknown"
            and record["Ann Narrative Injury Mention"] == "yes")
        airbag = (record["SV Any Air Bags Deployed?"] == "Yes"
                  or record["CP Any Air Bags Deployed?"] == "Yes"
                  or record["Ann Airbag Any Vehicle"] == "yes")
        serious = record["Ann Police Confirmed Max Severity"] in ("K", "A")
        air += injury
        ab += airbag
        ssi += serious
        city = record["City"]
        by_loc_air[city] = by_loc_air.get(city, 0) + injury
        by_loc_ab[city] = by_loc_ab.get(city, 0) + airbag
    assert (air, ab, ssi) == (48, 18, 2), (air, ab, ssi)
    assert by_loc_air == {"Phoenix": 24, "San Francisco": 16,
                          "Los Angeles": 8, "Austin": 0}, by_loc_air
    assert by_loc_ab == {"Phoenix": 8, "San Francisco": 7,
                         "Los Angeles": 2, "Austin": 1}, by_loc_ab
    print("fleet corpus verified: outcome totals 48/18/2 and per-location counts")


def main():
    os.makedirs(OUT, exist_ok=True)
    verify_design()
    rows = sgo_rows()
    verify_sgo(rows)
    write_sgo()
    write_az()
    write_ca("SAN FRANCISCO", "San Francisco", "SF")
    write_ca("LOS ANGELES", "Los Angeles", "LA")
    write_tx()
    write_exposure()
    write_cells()
    print(f"fixtures written to {os.path.normpath(OUT)}")


if __name__ == "__main__":
    main()
