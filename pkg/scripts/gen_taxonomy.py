#!/usr/bin/env python3
"""Regenerate the shipped sample taxonomy (synthetic English labels, sized
26 / 256 / 810 across the three tiers). Deterministic; run from the repo root:

    python scripts/gen_taxonomy.py > src/puda/data/taxonomy.txt
"""

from __future__ import annotations

TIER1 = {
    "Arts & Entertainment": [
        "Music & Audio", "Movies", "TV Shows & Programs", "Comics & Animation",
        "Performing Arts", "Visual Art & Design", "Celebrities & Entertainment News",
        "Events & Listings", "Humor", "Pop Idols & Fan Culture",
    ],
    "Autos & Vehicles": [
        "Car Shopping", "Motorcycles", "Vehicle Maintenance", "Electric Vehicles",
        "Classic Cars", "Commercial Vehicles", "Motorsports", "Car Rentals & Sharing",
        "Parts & Accessories", "Driving & Licensing",
    ],
    "Beauty & Fitness": [
        "Skincare", "Hair Care", "Cosmetics & Makeup", "Spas & Wellness Centers",
        "Fitness Training", "Yoga & Pilates", "Weight Management", "Nail Care",
        "Fragrances", "Men's Grooming",
    ],
    "Books & Literature": [
        "Fiction", "Nonfiction", "Poetry", "Literary Magazines", "E-Books",
        "Audiobooks", "Book Retailers", "Writers & Writing", "Children's Books",
        "Book Clubs & Reviews",
    ],
    "Business & Industrial": [
        "Advertising & Marketing", "Manufacturing", "Logistics & Freight",
        "Small Business", "Construction", "Agriculture & Forestry", "Energy & Utilities",
        "Professional Services", "Trade Shows & Conventions", "Industrial Equipment",
    ],
    "Computers & Electronics": [
        "Consumer Electronics", "Software", "Hardware Components", "Networking",
        "Programming", "Computer Security", "Smartphones & Wearables", "Audio Equipment",
        "Cameras & Camcorders", "Smart Home Devices",
    ],
    "Finance": [
        "Banking", "Investing", "Insurance", "Credit & Lending", "Retirement & Pensions",
        "Personal Budgeting", "Taxes & Accounting", "Currencies & Foreign Exchange",
        "Financial Planning", "Grants & Public Assistance",
    ],
    "Food & Drink": [
        "Restaurants", "Recipes & Cooking", "Cafes & Coffee", "Baking & Desserts",
        "Wine & Spirits", "Beer & Breweries", "Tea & Infusions", "Street Food",
        "Grocery & Food Retailers", "Vegetarian & Vegan Cuisine",
    ],
    "Games": [
        "Video Games", "Board Games", "Card Games", "Puzzles & Brain Teasers",
        "Mobile Games", "Game Consoles", "Esports", "Tabletop Role-Playing",
        "Arcade & Retro Games", "Game Development",
    ],
    "Health": [
        "Medical Conditions", "Nutrition", "Mental Health", "Pharmacies & Medications",
        "Public Health", "Alternative Medicine", "Dental Care", "Vision Care",
        "Sleep & Rest", "Health Insurance Plans",
    ],
    "Hobbies & Leisure": [
        "Camping & Hiking", "Fishing", "Gardening", "Photography", "Crafts & DIY",
        "Model Building", "Bird Watching", "Collecting", "Stargazing & Astronomy",
        "Radio-Controlled Vehicles",
    ],
    "Home & Garden": [
        "Home Improvement", "Interior Decor", "Kitchen & Dining", "Bedding & Linens",
        "Home Appliances", "Landscaping", "Pest Control", "Home Storage & Organization",
        "Home Security Systems", "Laundry & Cleaning",
    ],
    "Internet & Telecom": [
        "Web Services", "Mobile Carriers", "Broadband Providers", "Email & Messaging",
        "Search Engines", "Social Networks", "Cloud Storage", "Domain Names & Hosting",
        "Voice & Video Calling", "Online Privacy Tools",
    ],
    "Jobs & Education": [
        "Job Listings", "Resumes & Portfolios", "Career Development", "Universities & Colleges",
        "Vocational Training", "Language Learning", "Online Courses", "Exam Preparation",
        "Internships", "Teaching Resources",
    ],
    "Law & Government": [
        "Legal Services", "Courts & Judiciary", "Public Services", "Visas & Immigration",
        "Elections & Voting", "Military & Defense", "Law Enforcement", "Civic Participation",
        "Regulations & Compliance", "Intellectual Property",
    ],
    "News": [
        "World News", "Local News", "Business News", "Politics Coverage", "Weather Reports",
        "Sports News", "Technology News", "Science Reporting", "Opinion & Editorials",
        "Fact Checking",
    ],
    "Online Communities": [
        "Forums & Discussion Boards", "Blogging Platforms", "Photo & Video Sharing",
        "Fan Communities", "Question & Answer Sites", "Virtual Worlds", "Dating Services",
        "Live Streaming Communities", "Wikis & Collaborative Sites", "Newsletters",
    ],
    "People & Society": [
        "Family & Relationships", "Religion & Belief", "Social Issues", "Seniors & Aging",
        "Youth Culture", "Etiquette & Customs", "Genealogy", "Volunteering & Charity",
        "Weddings & Ceremonies", "Subcultures",
    ],
    "Pets & Animals": [
        "Dogs", "Cats", "Fish & Aquariums", "Birds", "Small Mammals", "Reptiles & Amphibians",
        "Pet Food & Supplies", "Veterinary Care", "Animal Shelters & Adoption",
        "Wildlife & Nature",
    ],
    "Real Estate": [
        "Apartments for Rent", "Homes for Sale", "Commercial Property", "Property Management",
        "Mortgages & Financing", "Moving & Relocation", "Real Estate Agencies",
        "Vacation Properties", "Land & Lots", "Shared Housing",
    ],
    "Reference": [
        "Dictionaries & Encyclopedias", "Maps & Atlases", "Libraries & Archives",
        "Calculators & Converters", "How-To Guides", "Public Records", "Biographies",
        "Quotations", "Almanacs & Calendars", "Museums & Exhibits",
    ],
    "Science": [
        "Physics", "Chemistry", "Biology", "Earth Sciences", "Space & Astronomy",
        "Mathematics", "Engineering & Technology", "Environment & Climate",
        "Scientific Institutions", "Research Publications",
    ],
    "Shopping": [
        "Apparel", "Footwear", "Luxury Goods", "Discount & Outlet Stores", "Online Marketplaces",
        "Gifts & Flowers", "Jewelry & Watches", "Secondhand & Thrift", "Coupons & Loyalty",
        "Consumer Reviews",
    ],
    "Sports": [
        "Golf", "Soccer", "Baseball", "Basketball", "Tennis", "Winter Sports",
        "Water Sports", "Running & Marathons", "Cycling", "Martial Arts",
    ],
    "Travel": [
        "Hotels & Accommodations", "Hot Springs & Onsen", "Flights & Airlines",
        "Rail Travel", "Cruises & Ferries", "Tourist Destinations", "Travel Guides",
        "Budget Travel", "Luggage & Travel Gear", "Travel Agencies & Packages",
    ],
    "Events & Attractions": [
        "Theme Parks", "Zoos & Aquariums", "Concerts & Festivals", "Fireworks & Seasonal Events",
        "Exhibitions & Fairs", "Sporting Events", "Local Attractions", "Ticket Sellers",
        "Food Festivals", "Night Markets",
    ],
}

# Facet pools for tier-3 children, rotated per parent so siblings vary.
FACETS = [
    "Guides & Tutorials", "Reviews & Comparisons", "News & Updates", "Local Services",
    "Equipment & Gear", "Events & Meetups", "Communities & Forums", "Deals & Discounts",
    "History & Culture", "For Beginners", "Advanced Topics", "Brands & Makers",
    "Rankings & Awards", "Seasonal Picks", "Maps & Directories", "Q&A & Troubleshooting",
]

TARGET_T2 = 256
TARGET_T3 = 810


def build() -> list[str]:
    tier1 = list(TIER1)
    assert len(tier1) == 26, len(tier1)

    # Tier 2: take 10 subcategories from the first 22 parents, 9 from the rest.
    tier2: list[tuple[str, str]] = []
    for index, parent in enumerate(tier1):
        take = 10 if index < TARGET_T2 - 9 * len(tier1) else 9
        children = TIER1[parent][:take]
        assert len(children) == take, parent
        tier2.extend((parent, child) for child in children)
    assert len(tier2) == TARGET_T2, len(tier2)

    # Tier 3: 4 facet children for the first 42 tier-2 nodes, 3 for the rest.
    extra = TARGET_T3 - 3 * len(tier2)
    tier3: list[tuple[str, str, str]] = []
    for index, (parent, child) in enumerate(tier2):
        take = 4 if index < extra else 3
        start = (index * 3) % len(FACETS)
        facets = [FACETS[(start + k) % len(FACETS)] for k in range(take)]
        tier3.extend((parent, child, facet) for facet in facets)
    assert len(tier3) == TARGET_T3, len(tier3)

    lines = ["# Sample category taxonomy: 26 tier-1, 256 tier-2, 810 tier-3 paths.",
             "# Synthetic English labels; the format is locale-agnostic."]
    for parent in tier1:
        lines.append(f"/{parent}")
    for parent, child in tier2:
        lines.append(f"/{parent}/{child}")
    for parent, child, facet in tier3:
        lines.append(f"/{parent}/{child}/{facet}")
    return lines


if __name__ == "__main__":
    print("\n".join(build()))
