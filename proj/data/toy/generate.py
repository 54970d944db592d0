"""Writes the toy flight-query corpus: token pos lemma tag per line."""

import random
from pathlib import Path

CITIES = ["boston", "denver", "dallas", "atlanta", "new york", "san francisco", "pittsburgh",
          "baltimore", "oakland", "washington"]
DAYS = ["monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"]
TIMES = ["morning", "afternoon", "evening", "night"]
AIRLINES = ["delta", "united", "american airlines", "us air", "continental"]
NUMBERS = ["2", "5", "10", "1,000", "7:30"]

TEMPLATES = [
    "show me flights from {fromloc.city_name} to {toloc.city_name}",
    "i want to fly from {fromloc.city_name} to {toloc.city_name} on {depart_date.day_name}",
    "list {airline_name} flights to {toloc.city_name}",
    "what flights leave {fromloc.city_name} in the {depart_time.period_of_day}",
    "flights from {fromloc.city_name} to {toloc.city_name} {depart_date.day_name} {depart_time.period_of_day}",
    "give me the fares on {airline_name} from {fromloc.city_name} to {toloc.city_name}",
    "does {airline_name} fly to {toloc.city_name}",
    "i need {round_trip.count} tickets to {toloc.city_name} leaving {depart_date.day_name}",
    "cheapest flight to {toloc.city_name}",
    "what is flight {flight_number} from {fromloc.city_name}",
]

FILLERS = {
    "fromloc.city_name": CITIES, "toloc.city_name": CITIES, "depart_date.day_name": DAYS,
    "depart_time.period_of_day": TIMES, "airline_name": AIRLINES, "round_trip.count": NUMBERS,
    "flight_number": NUMBERS,
}

POS = {"show": "VB", "me": "PRP", "flights": "NNS", "flight": "NN", "from": "IN", "to": "TO",
       "i": "PRP", "want": "VBP", "fly": "VB", "on": "IN", "list": "VB", "what": "WP",
       "leave": "VBP", "in": "IN", "the": "DT", "give": "VB", "fares": "NNS", "does": "VBZ",
       "need": "VBP", "tickets": "NNS", "leaving": "VBG", "cheapest": "JJS", "is": "VBZ"}
LEMMA = {"flights": "flight", "fares": "fare", "tickets": "ticket", "leaving": "leave",
         "does": "do", "is": "be", "cheapest": "cheap"}


def sentence(rng):
    template = rng.choice(TEMPLATES)
    rows = []
    for piece in template.split():
        if piece.startswith("{"):
            concept = piece[1:-1]
            words = rng.choice(FILLERS[concept]).split()
            for i, w in enumerate(words):
                pos = "CD" if concept in ("round_trip.count", "flight_number") else "NNP"
                rows.append((w, pos, w, ("B-" if i == 0 else "I-") + concept))
        else:
            rows.append((piece, POS.get(piece, "NN"), LEMMA.get(piece, piece), "O"))
    return rows


def write(path, sentences):
    with open(path, "w") as f:
        for s in sentences:
            for row in s:
                f.write(" ".join(row) + "\n")
            f.write("\n")


def main():
    here = Path(__file__).parent
    rng = random.Random(20190101)
    write(here / "train.txt", [sentence(rng) for _ in range(50)])
    write(here / "test.txt", [sentence(rng) for _ in range(20)])
    vocab = sorted({w for t in TEMPLATES for w in t.split() if not w.startswith("{")} |
                   {w for v in FILLERS.values() for phrase in v for w in phrase.split()})
    # A few words deliberately lack a vector.
    vocab = [w for w in vocab if w not in ("oakland", "cheapest", "7:30")]
    with open(here / "embeddings.txt", "w") as f:
        f.write(f"{len(vocab)} 8\n")
        for w in vocab:
            f.write(w + " " + " ".join(f"{rng.uniform(-1, 1):.6f}" for _ in range(8)) + "\n")


if __name__ == "__main__":
    main()
