#!/usr/bin/env python3
"""Regenerate the 25-capture fixture corpus plus profile and query fixtures.

Four pages carry controlled token frequencies so the merged keyword set has
scores in each threshold band (>=0.90, 0.85-0.90, 0.80-0.85, 0.75-0.80);
assertions below fail loudly if edits break that. Run from the repo root:

    python scripts/gen_corpus.py
"""

from __future__ import annotations

import json
import sys
from collections import Counter
from datetime import datetime, timedelta, timezone
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from puda.backends import tokenize  # noqa: E402

USER_ID = "persona-001"
BASE_TS = datetime(2026, 5, 12, 9, 0, 0, tzinfo=timezone.utc)

# (slug, title, paragraphs, {token: exact_count} assertions)
PAGES: list[tuple[str, str, list[str], dict[str, int]]] = [
    (
        "travel/hakone-rotenburo-ryokan",
        "Hakone Rotenburo Ryokan Picks",
        [
            "Hakone remains the classic onsen escape from Tokyo, and every onsen trip "
            "deserves at least one night in a ryokan with a private rotenburo.",
            "A rotenburo is an open-air bath; soaking in a rotenburo while rain taps the "
            "maple leaves is the whole point of onsen travel.",
            "Our three favourite stays pair an indoor onsen with a cedar rotenburo on the "
            "balcony, so you can alternate between the big onsen downstairs and your own "
            "rotenburo at midnight.",
            "Book early: rooms with a rotenburo sell out first, and the best onsen inns "
            "release plans months ahead.",
            "If the budget is tight, day-use onsen passes let you sample a famous outdoor "
            "bath without the overnight onsen price.",
        ],
        {"onsen": 8, "rotenburo": 7},  # 0.875 after merge
    ),
    (
        "sports/fuji-golf-course-review",
        "Golf Below Mount Fuji: Course Review",
        [
            "This golf course sits on lava soil, which keeps every fairway firm even after "
            "summer storms.",
            "The front nine of the golf layout rewards patience; the second fairway doglegs "
            "hard left around a pond.",
            "On the back nine the golf gets tougher: the signature hole plays over a ravine "
            "to a narrow fairway framed by red pines.",
            "Greens fees include a caddie cart, and the golf clubhouse bath overlooks the "
            "eighteenth fairway at sunset.",
            "Verdict: demanding but fair for mid-handicappers.",
        ],
        {"golf": 5, "fairway": 4},  # 0.80
    ),
    (
        "outdoors/lakeside-camping-checklist",
        "Lakeside Camping Checklist",
        [
            "Camping by the lake in May means cold nights, so pack a proper lantern and a "
            "three-season sleeping bag.",
            "Our camping checklist starts with shelter: tent, groundsheet, and a backup "
            "tarp; lighting goes in the same crate as the stove.",
            "Good camping food is simple food: rice, miso, and grilled fish; hang the "
            "lantern high so the prep table stays bright.",
            "Before leaving, test the stove at home and charge the spare battery "
            "for the lantern.",
        ],
        {"camping": 4, "lantern": 3},  # 0.75
    ),
    (
        "food/kaiseki-dinner-hakone",
        "Kaiseki Dinner Courses Explained",
        [
            "A ryokan dinner in Hakone usually means kaiseki: a procession of small dishes "
            "that turns dinner into theatre.",
            "Classic kaiseki opens with an appetizer tray, and the dinner then moves through "
            "sashimi, a simmered dish, and a grilled course.",
            "Spring kaiseki leans on bamboo shoots; autumn kaiseki celebrates matsutake, and "
            "a winter dinner adds a hotpot.",
            "Kaiseki portions look small, yet the dinner stretches past ten courses, so "
            "arrive hungry; many inns serve the kaiseki dinner in your room.",
            "Vegetarian kaiseki exists too: ask for shojin ryori when booking, because the "
            "kitchen plans each kaiseki dinner days ahead.",
            "However you order it, kaiseki is the dinner that makes a hot-spring dinner stay "
            "memorable, the dinner guests remember.",
        ],
        {"kaiseki": 10, "dinner": 11},  # 0.909
    ),
    (
        "travel/hakone-hotels-compared",
        "Hakone Hotels and Accommodations Compared",
        [
            "We compared twelve hotels and smaller accommodations across Hakone for a "
            "two-night stay.",
            "Reviews from recent guests praise the lake-view hotels for breakfast, while "
            "budget accommodations near the station win on price.",
            "Our comparisons weigh room size, bath quality, and access to the ropeway.",
            "Families liked hotels with connecting rooms; couples preferred quiet "
            "accommodations up the hill with evening kaiseki plans.",
        ],
        {},
    ),
    (
        "food/tokyo-station-restaurants",
        "Ten Restaurants Inside Tokyo Station",
        [
            "Tokyo Station hides excellent restaurants behind its ramen street, and most "
            "seats turn over fast at lunch.",
            "Three of these restaurants serve regional noodles; two specialise in eel; the "
            "rest cover sushi, curry, and delicious tempura.",
            "Every restaurant here takes cards, and the food court near the north gate "
            "suits groups that cannot agree.",
            "Arrive before noon or after two, because the popular restaurants queue for "
            "forty minutes.",
        ],
        {},
    ),
    (
        "travel/rail-pass-deals",
        "Regional Rail Pass Deals and Discounts",
        [
            "Several rail operators publish seasonal deals for foreign and domestic "
            "travellers alike.",
            "The best discounts bundle the mountain railway, the ropeway, and the pirate "
            "boat into one travel pass.",
            "Check the deals page each Friday: flash discounts appear for shoulder-season "
            "weekdays.",
            "A two-day pass pays for itself after three rides, making it the easiest travel "
            "saving on this list.",
        ],
        {},
    ),
    (
        "travel/onsen-etiquette-beginners",
        "Onsen Etiquette for Beginners",
        [
            "First-time visitors worry about onsen rules, but the etiquette for beginners "
            "fits on one hand.",
            "Wash and rinse at the seated showers before entering the bath; towels stay out "
            "of the water.",
            "Beginners should start with a cooler pool and limit the first soak to ten "
            "minutes.",
            "Tattoo policies vary, so beginners should check the guides posted at the "
            "entrance or ask the front desk.",
        ],
        {},
    ),
    (
        "sports/golf-equipment-gear",
        "Golf Equipment and Gear for Rainy Rounds",
        [
            "Rain gear decides whether a wet round of golf is fun or miserable.",
            "Essential equipment: a waterproof glove, spiked shoes, and a towel clipped "
            "under the umbrella.",
            "Mid-priced rain jackets beat the premium gear on breathability this season, "
            "according to our equipment lab.",
            "Keep spare gear in the locker: dry socks after nine holes feel like a luxury.",
        ],
        {},
    ),
    (
        "outdoors/hakone-hiking-trails",
        "Old Highway Hiking Trails Above Hakone",
        [
            "The old stone highway offers gentle hiking between cedar rows, two hours end "
            "to end.",
            "Serious hiking starts past the pass, where the trail climbs to a crater-rim "
            "ridge with lake views.",
            "Combine the hike with camping at the lakeside site, or descend early for an "
            "onsen soak.",
            "Carry water: vending machines vanish once the hiking trail leaves the village.",
        ],
        {},
    ),
    (
        "travel/yubara-onsen-jp",
        "週末の温泉旅行メモ",
        [
            "金曜の夜に出発して、土曜の朝は湯原の温泉に入った。露天風呂から川が見えて、とても静かだった。",
            "宿の夕食は会席料理で、量がちょうどよかった。朝食のあとにもう一度温泉に入った。",
            "帰りに道の駅へ寄って、地元の野菜とわさび漬けを買った。次は紅葉の季節に来たい。",
        ],
        {},
    ),
    (
        "wellness/spa-weekend-plan",
        "Spas and Wellness Weekend Plan",
        [
            "A wellness weekend near the lake: morning yoga, an afternoon at one of the "
            "quieter spas, and an early kaiseki dinner.",
            "The hotel spas here offer a relaxing stone sauna; book the massage slot before "
            "breakfast because the wellness centers fill by noon.",
            "Bring a book: the relaxation lounge overlooks the valley and the silence is "
            "wonderful.",
        ],
        {},
    ),
    (
        "travel/ryokan-booking-tips",
        "Ryokan Booking Tips for Budget Travel",
        [
            "Budget travel and ryokan stays can coexist if you book weekday plans without "
            "dinner.",
            "Cancellation windows matter: most ryokan charge from three days out, so budget "
            "travellers should set calendar reminders.",
            "Shoulder seasons offer the same rooms at two-thirds the price, the single "
            "biggest travel saving we know.",
        ],
        {},
    ),
    (
        "travel/kyoto-rail-guide",
        "Kyoto by Rail: A Practical Guide",
        [
            "Rail travel to Kyoto is simple: reserve a window seat on the right for the "
            "mountain side.",
            "From the station, the private rail lines reach the bamboo grove and the "
            "eastern temples faster than buses.",
            "Our guide lists the platforms, the lockers, and the one transfer that confuses "
            "everyone.",
        ],
        {},
    ),
    (
        "food/street-food-market-jp",
        "市場の食べ歩きメモ",
        [
            "朝の市場で海鮮丼を食べた。まぐろが厚くて、味噌汁も美味しかった。Street food here is honest and cheap.",
            "焼き牡蠣の屋台には行列ができていた。食べ歩きは二時間で十分だった。",
        ],
        {},
    ),
    (
        "travel/yamanashi-winery-tour",
        "Yamanashi Winery Tour Notes",
        [
            "The winery tour starts in the vineyard rows and ends in a cellar tasting of "
            "six wines.",
            "Koshu grapes make a crisp white wine that pairs with tempura; the reserve "
            "bottles sell out by noon.",
            "Take the early train: the last tasting slot misses the return express, and "
            "taxis are scarce during harvest.",
        ],
        {},
    ),
    (
        "fitness/spring-training-plan",
        "Spring Fitness Training Plan",
        [
            "This four-week fitness plan mixes easy runs, mobility work, and two strength "
            "sessions.",
            "Week one keeps training light: twenty-minute jogs and a long walk on Sunday.",
            "By week four the training peaks with hill repeats; rest days remain "
            "non-negotiable.",
        ],
        {},
    ),
    (
        "news/hakone-weather-outlook",
        "Mountain Weather Outlook for the Weekend",
        [
            "The weekend weather outlook calls for morning fog on the pass and clear "
            "afternoons.",
            "Saturday brings a weak front: pack rain gear for the ropeway and expect the "
            "crater walk to close if sulfur readings rise.",
            "Sunday looks stable, ideal for the lake loop and outdoor baths.",
        ],
        {},
    ),
    (
        "sports/first-marathon-training",
        "Running Your First Marathon",
        [
            "Marathon training rewards consistency over heroics: three runs a week is "
            "enough for a first finish.",
            "The long run grows by two kilometres weekly; every fourth week steps back for "
            "recovery.",
            "Practice the race breakfast during training, never on race day.",
        ],
        {},
    ),
    (
        "hobby/lake-photography-spots",
        "Photography Spots Around the Lake",
        [
            "Sunrise photography works best from the north shore, where the torii gate "
            "floats against the ridge.",
            "Bring a tripod: the blue hour over the lake lasts twenty minutes and rewards "
            "patient photography.",
            "In May, the azalea gardens add foreground colour for landscape photography.",
        ],
        {},
    ),
    (
        "music/kpop-dance-practice",
        "K-POP Dance Practice Playlists",
        [
            "This week's playlist collects dance practice videos from four K-POP groups, "
            "mirrored for easy learning.",
            "The choreography breakdown clips run at seventy percent speed, perfect for "
            "beginners learning the music.",
            "Fan meetups practice in the station plaza on Saturdays; newcomers welcome.",
        ],
        {},
    ),
    (
        "travel/packing-luggage-list",
        "Two-Night Trip Packing List and Luggage Notes",
        [
            "One small suitcase of luggage covers a two-night onsen trip if you roll "
            "clothes and skip the second pair of shoes.",
            "Travel gear worth its weight: a packable daypack, a dry bag for the bath "
            "kit, and a luggage scale for souvenirs.",
            "Ship the big suitcase ahead with a courier and walk the old highway "
            "unencumbered.",
        ],
        {},
    ),
    (
        "food/morning-fish-market",
        "Morning at the Fish Market",
        [
            "The fish market opens at five; the street food stalls outside grill scallops "
            "and eel skewers until noon.",
            "Go hungry and graze: tamagoyaki on a stick, tuna cheek, and a delicious bowl "
            "of clam soup.",
            "Cash helps at the older stalls, though the food hall now takes cards.",
        ],
        {},
    ),
    (
        "books/travel-guides-shelf",
        "New Travel Guides on the Shelf",
        [
            "The bookshop's travel shelf added three new guides this month: one on "
            "mountain railways, one on island ferries, one on regional food.",
            "The railway guides include foldout maps and seasonal timetables.",
            "Staff picks favour the food guide for its market walking tours and honest "
            "reviews.",
        ],
        {},
    ),
    (
        "travel/autumn-seasonal-picks",
        "Seasonal Picks: Planning an Autumn Escape",
        [
            "Autumn is the season everyone recommends and the season everyone underplans, "
            "so these seasonal picks start with the calendar: the maple front moves south "
            "for six weeks, and the famous valleys peak in different weeks every year.",
            "Our first pick is the gorge railway: the slow train crosses seven bridges, "
            "and the seasonal carriages open their windows so the whole valley smells of "
            "cedar; reserve the right-hand seats and bring a thermos, because the morning "
            "departures are cold and the station coffee queue eats your transfer time.",
            "The second pick pairs a ridge hike with a farmhouse lunch: the trail is "
            "gentle, the soba is handmade, and the persimmon trees along the descent are "
            "photogenic enough to slow any group by an hour, which is why we recommend "
            "starting before nine.",
            "Third, a lakeside onsen town that stays calm even in peak season: the baths "
            "face east across the water, the morning mist burns off by eight, and the "
            "back streets hide a sake brewery that opens its doors for tastings on "
            "weekends only.",
            "Finally, the practical notes: book accommodations five weeks ahead, carry "
            "cash for the mountain buses, check the seasonal closure list for the high "
            "passes, and keep one flexible day in the plan, because the best autumn days "
            "are the ones the forecast only admits to at the last minute.",
        ],
        {},
    ),
]


def build_html(title: str, paragraphs: list[str]) -> str:
    body = "".join(f"<p>{p}</p>" for p in paragraphs)
    return (
        "<html><head><title>"
        + title
        + "</title><style>body{font-family:serif;margin:2em}</style>"
        + "<script>window.__loaded = Date.now();</script></head>"
        + f"<body><h1>{title}</h1><div class=\"content\">{body}</div>"
        + "<footer>Notes &amp; links</footer></body></html>"
    )


def main() -> None:
    root = Path(__file__).resolve().parent.parent
    fixtures = root / "fixtures"
    fixtures.mkdir(exist_ok=True)

    assert len(PAGES) == 25, len(PAGES)
    lines = []
    for index, (slug, title, paragraphs, expected_counts) in enumerate(PAGES):
        text = title + " " + " ".join(paragraphs)
        counts = Counter(tokenize(text))
        for token, expected in expected_counts.items():
            assert counts[token] == expected, (slug, token, counts[token], expected)
        capture = {
            "url": f"https://example.net/{slug}",
            "title": title,
            "html_body": build_html(title, paragraphs),
            "captured_at": (BASE_TS + timedelta(minutes=5 * index)).strftime(
                "%Y-%m-%dT%H:%M:%S.000Z"
            ),
            "user_id": USER_ID,
        }
        lines.append(json.dumps(capture, ensure_ascii=False))
    (fixtures / "corpus.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")

    profile = {
        "name": "Aiko Tanaka",
        "age": 34,
        "date_of_birth": "1992-02-14",
        "gender": "female",
        "address": "2-3-1 Midori-cho, Musashino-shi, Tokyo",
    }
    (fixtures / "profile.json").write_text(
        json.dumps(profile, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )

    queries = [
        {"query_id": "q1", "text": "Plan a 2-day weekend trip near Tokyo. Total budget: 25,000 JPY."},
        {"query_id": "q2", "text": "Suggest a 3-day itinerary with a budget of 60,000 JPY."},
        {"query_id": "q3", "text": "I have 5 days off and 120,000 JPY. Where should I go?"},
        {"query_id": "q4", "text": "Plan a relaxed 7-day trip, budget 200,000 JPY, no flights."},
        {"query_id": "q5", "text": "Design an 8-day summer journey with a 250,000 JPY budget."},
    ]
    (fixtures / "queries.json").write_text(
        json.dumps(queries, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    print(f"wrote {len(lines)} captures, profile, and {len(queries)} queries")


if __name__ == "__main__":
    main()
