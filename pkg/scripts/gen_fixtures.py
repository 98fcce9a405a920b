#!/usr/bin/env python3
"""Regenerate the bundled shop fixtures deterministically.

Writes src/rewardplan/assets/fixtures/{catalog.json,goals.json}. The
catalog holds 50 products: two hand-written anchor products exercised by
tests (stable ids and prices) plus 48 seeded synthetic ones. Goals are
derived from catalog products via the datagen synthesizer so every goal
is satisfiable and oracle rewards exist. Rerunning reproduces identical
bytes.
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from rewardplan.datagen.synthesize import synthesize_shop_goals  # noqa: E402
from rewardplan.envs.shop import dump_goals, load_catalog  # noqa: E402

FIXTURES = ROOT / "src" / "rewardplan" / "assets" / "fixtures"

ANCHORS = [
    {
        "id": "B09STMXYR5",
        "title": (
            "JUSTQIJUN 2pcs 1.5 Inch Bluetooth Radio Speaker Unit 4 Ohm 6W Sound Bar "
            "Horn 18 Core 45mm Music Portable Loudspeaker Rubber Edge Compatible with "
            "Altavoces Bookshelf Speakers"
        ),
        "attributes": ["bluetooth", "speaker", "soundbar", "radio", "long-lasting"],
        "options": {"color": ["40mm 4 ohm 6w", "50mm 8 ohm 10w"]},
        "price": 28.36,
        "description": "Two compact full-range driver units for DIY sound bars.",
    },
    {
        "id": "B09SWKXBY5",
        "title": (
            "JUSTQIJUN 2pcs Full Range 2 Inch Speaker 15W DIY Soundbar Boombox Unit "
            "Portable Radio 10W 20w 4 Ohm Speaker HiFi Bluetooth Speakers 55mm "
            "Bookshelf Speakers"
        ),
        "attributes": ["bluetooth", "speaker", "soundbar", "hifi", "portable"],
        "options": {"color": ["4 ohm 10w", "4 ohm 15w", "4 ohm 20w"]},
        "price": 42.66,
        "description": "Full range two inch replacement drivers for boombox builds.",
    },
]

BRANDS = [
    "Northvale", "Brightline", "Cassiopy", "Durango", "Evermore", "Fernwood",
    "Glimmer", "Harborik", "Islewood", "Juniperon", "Kestrall", "Lumenora",
]

CATEGORIES = [
    ("canvas sneaker", ["canvas", "sneaker", "fashion", "sport", "lace-up"],
     {"size": ["6", "7", "8", "9", "10"], "color": ["black", "white", "navy", "red"]}),
    ("desk lamp", ["lamp", "led", "dimmable", "desk", "adjustable"],
     {"color": ["black", "white", "silver"], "wattage": ["5w", "8w", "12w"]}),
    ("travel backpack", ["backpack", "waterproof", "travel", "laptop", "lightweight"],
     {"size": ["20l", "30l", "40l"], "color": ["gray", "green", "black"]}),
    ("ceramic mug", ["mug", "ceramic", "coffee", "dishwasher-safe", "glazed"],
     {"color": ["blue", "cream", "forest"], "capacity": ["10 oz", "14 oz"]}),
    ("rain jacket", ["jacket", "rain", "hooded", "windproof", "packable"],
     {"size": ["small", "medium", "large", "x-large"], "color": ["yellow", "olive", "charcoal"]}),
    ("mechanical keyboard", ["keyboard", "mechanical", "backlit", "wired", "compact"],
     {"switch": ["red", "brown", "blue"], "layout": ["60 percent", "tkl", "full"]}),
    ("wireless headphones", ["headphones", "wireless", "over-ear", "noise-cancelling", "foldable"],
     {"color": ["black", "white", "rose"]}),
    ("water bottle", ["bottle", "insulated", "stainless", "leakproof", "sport"],
     {"capacity": ["17 oz", "25 oz", "32 oz"], "color": ["teal", "coral", "slate"]}),
    ("wool scarf", ["scarf", "wool", "winter", "soft", "knit"],
     {"color": ["burgundy", "camel", "heather"]}),
    ("yoga mat", ["mat", "yoga", "non-slip", "cushioned", "eco-friendly"],
     {"thickness": ["4mm", "6mm", "8mm"], "color": ["plum", "sage", "stone"]}),
    ("bluetooth speaker", ["speaker", "bluetooth", "portable", "waterproof", "stereo"],
     {"color": ["black", "blue", "orange"]}),
    ("table clock", ["clock", "alarm", "analog", "silent", "bedside"],
     {"color": ["white", "mint", "walnut"]}),
]

ADJECTIVES = ["Classic", "Compact", "Premium", "Everyday", "Studio", "Trail", "Urban", "Heritage"]


def make_products() -> list[dict]:
    rng = random.Random(2024)
    products = [dict(p) for p in ANCHORS]
    used_ids = {p["id"] for p in products}
    alphabet = "ABCDEFGHJKLMNPQRSTUVWXYZ0123456789"
    while len(products) < 50:
        noun, attrs, option_pool = CATEGORIES[len(products) % len(CATEGORIES)]
        pid = "B0" + "".join(rng.choice(alphabet) for _ in range(8))
        if pid in used_ids:
            continue
        used_ids.add(pid)
        brand = rng.choice(BRANDS)
        adjective = rng.choice(ADJECTIVES)
        title = f"{brand} {adjective} {noun.title()} {rng.randint(100, 999)}"
        groups = rng.sample(sorted(option_pool), k=min(len(option_pool), rng.randint(1, 2)))
        options = {g: option_pool[g] for g in sorted(groups)}
        products.append({
            "id": pid,
            "title": title,
            "attributes": sorted(rng.sample(attrs, k=rng.randint(3, len(attrs)))),
            "options": options,
            "price": rng.randint(499, 9999) / 100,
            "description": f"{adjective} {noun} from {brand}.",
        })
    return products


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    catalog_path = FIXTURES / "catalog.json"
    with open(catalog_path, "w", encoding="utf-8") as f:
        json.dump(make_products(), f, ensure_ascii=False, indent=2)
        f.write("\n")
    catalog = load_catalog(str(catalog_path))
    synthesis = synthesize_shop_goals(catalog, m=20, seed=11)
    goals_path = FIXTURES / "goals.json"
    dump_goals(synthesis.goals, str(goals_path))
    print(f"wrote {catalog_path} ({len(catalog.products)} products)")
    print(f"wrote {goals_path} ({len(synthesis.goals)} goals)")


if __name__ == "__main__":
    main()
