#!/usr/bin/env python3
"""Regenerates the replay recordings under fixtures/tineretului.

The recordings are synthetic. Facilities are placed at exact great-circle
distances from the reference point so the derived inputs are known:

  lifestyle counts  supermarket 9, restaurant 38, fast food 4, park 12
  schools           kindergarten 300 m; primary 250, 400, 700 m; high school 200 m
  metro entrances   320 m and 650 m
  transport         29 bus stops and 12 tram stops serving 11 distinct routes
  traffic           five samples whose point scores average 75
  air               90-day hourly history whose means give an air score of 94.33
"""

import argparse
import json
import math
import pathlib
import zlib

EARTH_RADIUS_M = 6371008.8
CENTER = (44.4108, 26.1084)
PARK = (44.4046, 26.1057)
EMPTY = (44.3, 26.0)
OCEAN = (44.0, 31.0)
RECORDED_AT = "2024-05-14T09:00:00Z"
END_EPOCH = 1715677200  # 2024-05-14T09:00:00Z
WINDOW_DAYS = 90
ADDRESS = "Tineretului, Sector 4, București"
UNPARSEABLE = "zzzz qqqq 00000"


def destination(origin, bearing_deg, distance_m):
    lat1, lon1 = math.radians(origin[0]), math.radians(origin[1])
    brg = math.radians(bearing_deg)
    delta = distance_m / EARTH_RADIUS_M
    lat2 = math.asin(math.sin(lat1) * math.cos(delta) + math.cos(lat1) * math.sin(delta) * math.cos(brg))
    lon2 = lon1 + math.atan2(math.sin(brg) * math.sin(delta) * math.cos(lat1),
                             math.cos(delta) - math.sin(lat1) * math.sin(lat2))
    lon2 = (lon2 + 3 * math.pi) % (2 * math.pi) - math.pi
    return (math.degrees(lat2), math.degrees(lon2))


def sample_points(center):
    return [center] + [destination(center, b, 550.0) for b in (45.0, 135.0, 225.0, 315.0)]


def r6(x):
    return round(x, 6)


def write(root, provider, name, op, params, response, compact=False):
    path = root / provider / f"{name}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"request": {"op": op, "params": params}, "response": response, "recorded_at": RECORDED_AT}
    with path.open("w", encoding="utf-8") as f:
        if compact:
            json.dump(doc, f, ensure_ascii=False, separators=(",", ":"))
        else:
            json.dump(doc, f, ensure_ascii=False, indent=1)
        f.write("\n")


def place(point, display_name, address):
    return {
        "place_id": zlib.crc32(display_name.encode()) % 10**8,
        "lat": f"{point[0]:.7f}",
        "lon": f"{point[1]:.7f}",
        "display_name": display_name,
        "address": address,
    }


class Elements:
    def __init__(self, center):
        self.center = center
        self.items = []
        self.next_id = 1000

    def add(self, bearing, distance, tags, kind="node"):
        lat, lon = destination(self.center, bearing, distance)
        self.next_id += 1
        el = {"type": kind, "id": self.next_id, "tags": tags}
        if kind == "node":
            el["lat"], el["lon"] = r6(lat), r6(lon)
        else:
            el["center"] = {"lat": r6(lat), "lon": r6(lon)}
        self.items.append(el)
        return el


def tineretului_facilities():
    e = Elements(CENTER)
    golden = 137.50776405  # spreads bearings without collisions

    def spread(i):
        return (i * golden) % 360.0

    supermarkets = ["Mega Image", "Lidl", "Kaufland", "Carrefour Market", "Profi", "Penny", "Auchan Supermarket",
                    "La Doi Pasi", "Mega Image Tineretului"]
    for i, name in enumerate(supermarkets):
        e.add(spread(i), 150 + 70 * i, {"shop": "supermarket", "name": name})
    # The same store mapped as a node and as a building outline.
    dup = e.items[1]
    e.items.append({"type": "way", "id": 90001, "center": {"lat": dup["lat"], "lon": dup["lon"]},
                    "tags": {"shop": "supermarket", "name": "LIDL "}})

    for i in range(38):
        e.add(spread(100 + i), 90 + 18 * i, {"amenity": "restaurant", "name": f"Restaurant {i + 1}"})
    e.items.append(dict(e.items[-5]))  # verbatim duplicate node
    for i in range(4):
        e.add(spread(200 + i), 180 + 120 * i, {"amenity": "fast_food", "name": f"Fast Food {i + 1}"})
    for i in range(12):
        tags = {"leisure": "park"}
        if i == 0:
            tags["name"] = "Parcul Tineretului"
        e.add(spread(300 + i), 120 + 55 * i, tags, kind="way" if i % 2 == 0 else "node")

    e.add(80.0, 300.0, {"amenity": "kindergarten", "name": "Grădinița nr. 214"})
    e.add(160.0, 250.0, {"amenity": "school", "name": "Școala Gimnazială nr. 133"})
    e.add(250.0, 400.0, {"amenity": "school", "name": "Școala Gimnazială nr. 190"}, kind="way")
    e.add(330.0, 700.0, {"amenity": "school", "name": "Școala Gimnazială Tineretului", "grades": "0-8"})
    e.add(20.0, 200.0, {"amenity": "school", "name": "Liceul Teoretic Ion Creangă"})

    e.add(200.0, 320.0, {"railway": "subway_entrance", "name": "Tineretului"})
    e.add(110.0, 650.0, {"railway": "subway_entrance", "name": "Tineretului 2"})

    bus_routes = ["102", "116", "123", "232", "312", "313", "311"]
    tram_routes = ["1", "10", "19", "25"]
    for i in range(29):
        refs = [bus_routes[i % 7], bus_routes[(i + 3) % 7]]
        tags = {"highway": "bus_stop", "name": f"Stația {i + 1}", "route_ref": ";".join(refs)}
        if i % 5 == 0:
            tags = {"public_transport": "platform", "bus": "yes", "name": f"Stația {i + 1}",
                    "route_ref": ", ".join(refs)}
        e.add(spread(400 + i), 110 + 23 * i, tags)
    for i in range(12):
        refs = [tram_routes[i % 4]]
        tags = {"railway": "tram_stop", "name": f"Tramvai {i + 1}", "route_ref": ";".join(refs)}
        if i % 4 == 3:
            tags = {"public_transport": "platform", "tram": "yes", "name": f"Tramvai {i + 1}", "route_ref": refs[0]}
        e.add(spread(500 + i), 140 + 55 * i, tags)

    # Inside the recorded 1000 m radius but outside the default 800 m query.
    e.add(10.0, 900.0, {"railway": "subway_entrance", "name": "Eroii Revoluției"})
    e.add(95.0, 880.0, {"highway": "bus_stop", "name": "Stația Depărtată", "route_ref": "999"})
    e.add(190.0, 950.0, {"shop": "supermarket", "name": "Hipermarket Periferic"})
    # Outside the recorded radius altogether.
    e.add(280.0, 1200.0, {"amenity": "restaurant", "name": "Restaurant Departe"})
    # Elements of no interest.
    e.add(300.0, 100.0, {"amenity": "bench"})
    e.items.append({"type": "node", "id": 90002, "lat": CENTER[0], "lon": CENTER[1]})
    return {"version": 0.6, "generator": "Overpass API", "elements": e.items}


def park_facilities():
    e = Elements(PARK)
    e.add(0.0, 0.0, {"leisure": "park", "name": "Parcul Tineretului"}, kind="way")
    e.add(90.0, 450.0, {"shop": "supermarket", "name": "Profi"})
    e.add(180.0, 380.0, {"amenity": "restaurant", "name": "Terasa Lacului"})
    e.add(270.0, 600.0, {"railway": "subway_entrance", "name": "Tineretului"})
    e.add(45.0, 520.0, {"highway": "bus_stop", "name": "Parc", "route_ref": "116"})
    return {"version": 0.6, "elements": e.items}


def flow(cur_speed, free_speed, cur_tt, free_tt, confidence):
    return {"flowSegmentData": {"frc": "FRC3", "currentSpeed": cur_speed, "freeFlowSpeed": free_speed,
                                "currentTravelTime": cur_tt, "freeFlowTravelTime": free_tt,
                                "confidence": confidence, "roadClosure": False}}


NO_SEGMENT = {"detailedError": {"code": "INVALID_REQUEST", "message": "Point too far from nearest existing segment."}}

TINERETULUI_FLOW = [
    flow(40, 50, 60, 48, 0.95),
    flow(45, 50, 100, 90, 1.0),
    flow(30, 50, 150, 90, 0.9),
    flow(42, 60, 200, 140, 1.0),
    flow(34, 40, 80, 68, 1.0),
]

AIR_MEANS = {"co": 200.0, "no": 0.1, "no2": 1.25, "o3": 5.0, "so2": 0.9, "pm2_5": 1.2, "pm10": 1.8, "nh3": 0.4}
AIR_SWING = {"co": 40.0, "no": 0.05, "no2": 0.5, "o3": 2.0, "so2": 0.3, "pm2_5": 0.4, "pm10": 0.6, "nh3": 0.2}


def air_history():
    hours = WINDOW_DAYS * 24
    start = END_EPOCH - hours * 3600
    entries = []
    # Readings come in +/- pairs so every gap (always a whole pair) keeps the mean exact.
    for pair in range(hours // 2):
        whole_gap = pair % 53 == 7
        for k in range(2):
            if whole_gap:
                continue
            dt = start + (2 * pair + k) * 3600
            sign = 1 if k == 0 else -1
            comps = {}
            for name, mean in AIR_MEANS.items():
                if name == "nh3" and pair % 41 == 3:
                    continue  # single-component gap
                comps[name] = round(mean + sign * AIR_SWING[name], 4)
            entries.append({"dt": dt, "main": {"aqi": 1}, "components": comps})
    # Provider returns entries out of order occasionally.
    entries[10], entries[11] = entries[11], entries[10]
    return {"coord": {"lon": CENTER[1], "lat": CENTER[0]}, "list": entries}


def point_params(p):
    return {"lat": r6(p[0]), "lon": r6(p[1])}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "fixtures"))
    args = parser.parse_args()
    root = pathlib.Path(args.out) / "tineretului"

    tineretului_address = {"road": "Bulevardul Tineretului", "suburb": "Tineretului", "city_district": "Sector 4",
                           "city": "București", "postcode": "040000", "country": "România", "country_code": "ro"}
    write(root, "geocode", "forward_tineretului", "forward", {"q": ADDRESS},
          [place(CENTER, "Bulevardul Tineretului, Tineretului, Sector 4, București, 040000, România",
                 tineretului_address)])
    write(root, "geocode", "forward_unparseable", "forward", {"q": UNPARSEABLE}, [])
    write(root, "geocode", "reverse_tineretului", "reverse", point_params(CENTER),
          place(CENTER, "Bulevardul Tineretului, Tineretului, Sector 4, București, 040000, România",
                tineretului_address))
    write(root, "geocode", "reverse_park", "reverse", point_params(PARK),
          place(PARK, "Parcul Tineretului, Sector 4, București, România",
                {"leisure": "Parcul Tineretului", "city_district": "Sector 4", "city": "București",
                 "country": "România"}))
    write(root, "geocode", "reverse_empty", "reverse", point_params(EMPTY),
          place(EMPTY, "Jilava, Ilfov, România", {"village": "Jilava", "county": "Ilfov", "country": "România"}))
    write(root, "geocode", "reverse_ocean", "reverse", point_params(OCEAN), {"error": "Unable to geocode"})

    write(root, "facilities", "tineretului_1000", "query", {**point_params(CENTER), "radius_m": 1000},
          tineretului_facilities())
    write(root, "facilities", "park_1000", "query", {**point_params(PARK), "radius_m": 1000}, park_facilities())
    write(root, "facilities", "empty_1000", "query", {**point_params(EMPTY), "radius_m": 1000},
          {"version": 0.6, "elements": []})

    for i, (p, body) in enumerate(zip(sample_points(CENTER), TINERETULUI_FLOW)):
        write(root, "traffic", f"tineretului_p{i}", "flow_segment", {**point_params(p), "zoom": 10}, body)
    park_flow = [NO_SEGMENT, flow(28, 40, 90, 63, 1.0), flow(36, 45, 70, 56, 0.9), flow(50, 50, 40, 40, 1.0),
                 flow(20, 40, 120, 60, 0.8)]
    for i, (p, body) in enumerate(zip(sample_points(PARK), park_flow)):
        write(root, "traffic", f"park_p{i}", "flow_segment", {**point_params(p), "zoom": 10}, body)
    for i, p in enumerate(sample_points(EMPTY)):
        write(root, "traffic", f"empty_p{i}", "flow_segment", {**point_params(p), "zoom": 10}, NO_SEGMENT)

    history = air_history()
    for name, p in (("tineretului", CENTER), ("park", PARK), ("empty", EMPTY)):
        write(root, "air", f"{name}_90d", "history", {**point_params(p), "window_days": WINDOW_DAYS}, history,
              compact=True)

    (root / "request.json").write_text(json.dumps({"address": ADDRESS, "radius_m": 800}, ensure_ascii=False,
                                                  indent=1) + "\n", encoding="utf-8")
    targets = {"lifestyle": 91, "education": 73, "surface": 88, "metro": 85}
    (root / "targets.json").write_text(json.dumps(targets, indent=1) + "\n", encoding="utf-8")
    points = {"center": point_params(CENTER), "park": point_params(PARK), "empty": point_params(EMPTY),
              "ocean": point_params(OCEAN), "address": ADDRESS, "unparseable_address": UNPARSEABLE}
    (root / "points.json").write_text(json.dumps(points, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
