"""Regenerates the JSONL fixtures in this directory.

    python3 tests/fixtures/make_fixtures.py

Output is deterministic; the files are checked in so the tests never run this.
taxonomy.jsonl is written from the hand-labelled cases below, one per line.
"""

import json
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent


def param(type_, description, enum=None, items=None):
    p = {"type": type_}
    if items is not None:
        p["items"] = items
    if enum is not None:
        p["enum"] = enum
    p["description"] = description
    return p


def tool(name, description, properties, required):
    return {
        "name": name,
        "description": description,
        "parameters": {"type": "dict", "properties": properties, "required": required},
    }


WEATHER = tool(
    "get_weather",
    "Current weather and short forecast for a city.",
    {
        "city": param("string", "City name."),
        "unit": param("string", "Temperature unit.", enum=["celsius", "fahrenheit"]),
        "days": param("integer", "Forecast length in days."),
    },
    ["city"],
)
FLIGHT = tool(
    "book_flight",
    "Book a one-way flight.",
    {
        "origin": param("string", "Departure airport code."),
        "destination": param("string", "Arrival airport code."),
        "date": param("string", "Departure date, YYYY-MM-DD."),
        "passengers": param("integer", "Number of travellers."),
        "cabin": param("string", "Cabin class.", enum=["economy", "business"]),
    },
    ["origin", "destination", "date"],
)
CURRENCY = tool(
    "convert_currency",
    "Convert an amount between currencies.",
    {
        "amount": param("number", "Amount to convert."),
        "source": param("string", "ISO code of the source currency."),
        "target": param("string", "ISO code of the target currency."),
    },
    ["amount", "source", "target"],
)
ALARM = tool(
    "set_alarm",
    "Set an alarm on the user's phone.",
    {
        "time": param("string", "Time of day, HH:MM."),
        "repeat": param("boolean", "Repeat daily."),
        "label": param("string", "Alarm label."),
        "days": param("array", "Weekdays the alarm rings on.", items=param("string", "Weekday.")),
    },
    ["time"],
)
CATALOG = [WEATHER, FLIGHT, CURRENCY, ALARM]


def user(text):
    return [{"role": "user", "content": text}]


# ---------------------------------------------------------------------------
# Hand-labelled taxonomy cases: (label, query, gold, candidate).
# Gold uses acceptable-value lists; "" marks a parameter as optional.
# A string candidate is raw model output, a list is an already-parsed call list.
# ---------------------------------------------------------------------------

G_WEATHER = [{"get_weather": {"city": ["Paris"], "unit": ["celsius", ""], "days": [""]}}]
G_FLIGHT = [{"book_flight": {"origin": ["JFK"], "destination": ["LHR"], "date": ["2024-05-01"],
                             "passengers": [2], "cabin": ["economy", ""]}}]
G_CURRENCY = [{"convert_currency": {"amount": [100], "source": ["USD"], "target": ["EUR"]}}]
G_ALARM = [{"set_alarm": {"time": ["07:30"], "repeat": [True], "label": ["gym", ""]}}]
G_TWO = [
    {"get_weather": {"city": ["Paris"], "unit": [""], "days": [""]}},
    {"convert_currency": {"amount": [50], "source": ["EUR"], "target": ["GBP"]}},
]

Q_WEATHER = "What's the weather in Paris in celsius?"
Q_FLIGHT = "Book two economy seats from JFK to LHR on 2024-05-01."
Q_CURRENCY = "How much is 100 USD in EUR?"
Q_ALARM = "Wake me at 07:30 every day, label it gym."
Q_TWO = "Weather in Paris, and convert 50 EUR to GBP."
Q_CHAT = "Tell me a joke about penguins."

W = lambda **a: {"get_weather": a}
F = lambda **a: {"book_flight": a}
C = lambda **a: {"convert_currency": a}
A = lambda **a: {"set_alarm": a}

CASES = [
    # correct
    ("correct", Q_WEATHER, G_WEATHER, [W(city="Paris", unit="celsius")]),
    ("correct", Q_WEATHER, G_WEATHER, [W(city="Paris")]),
    ("correct", Q_CURRENCY, G_CURRENCY, [C(target="EUR", amount=100.0, source="USD")]),
    ("correct", Q_CHAT, [], []),
    ("correct", Q_TWO, G_TWO, '```json\n[{"get_weather": {"city": "Paris"}}, '
                              '{"convert_currency": {"amount": 50, "source": "EUR", "target": "GBP"}}]\n```'),
    # malformed output
    ("IncorrectOutputFormat", Q_WEATHER, G_WEATHER, "I would call get_weather for Paris."),
    ("IncorrectOutputFormat", Q_WEATHER, G_WEATHER, '[{"get_weather": {"city": "Par'),
    ("IncorrectOutputFormat", Q_CURRENCY, G_CURRENCY, 'convert_currency(amount=100, source="USD", target="EUR")'),
    ("IncorrectOutputFormat", Q_ALARM, G_ALARM, '[{"set_alarm": {"time": "07:30", "repeat": true,}}]'),
    ("IncorrectOutputFormat", Q_CHAT, [], "Sure! Why did the penguin cross the road?"),
    # call made when none was needed
    ("IrrelevanceError", Q_CHAT, [], [W(city="Antarctica")]),
    ("IrrelevanceError", Q_CHAT, [], [A(time="12:00")]),
    ("IrrelevanceError", Q_CHAT, [], [W(city="Oslo"), C(amount=1, source="NOK", target="USD")]),
    ("IrrelevanceError", "Thanks, that's all.", [], '```json\n[{"get_weather": {"city": "Paris"}}]\n```'),
    # wrong number of calls
    ("IncorrectNumberOfFunctions", Q_WEATHER, G_WEATHER, [W(city="Paris"), W(city="Paris", unit="celsius")]),
    ("IncorrectNumberOfFunctions", Q_TWO, G_TWO, [W(city="Paris")]),
    ("IncorrectNumberOfFunctions", Q_CURRENCY, G_CURRENCY, []),
    ("IncorrectNumberOfFunctions", Q_TWO, G_TWO,
     [W(city="Paris"), C(amount=50, source="EUR", target="GBP"), C(amount=50, source="EUR", target="USD")]),
    # wrong function
    ("IncorrectFunctionName", Q_WEATHER, G_WEATHER, [{"get_forecast": {"city": "Paris"}}]),
    ("IncorrectFunctionName", Q_CURRENCY, G_CURRENCY, [{"currency_convert": {"amount": 100, "source": "USD", "target": "EUR"}}]),
    ("IncorrectFunctionName", Q_TWO, G_TWO, [W(city="Paris"), W(city="London")]),
    ("IncorrectFunctionName", Q_ALARM, G_ALARM, [W(city="gym")]),
    # a required argument left out
    ("MissingRequiredParameter", Q_WEATHER, G_WEATHER, [W(unit="celsius")]),
    ("MissingRequiredParameter", Q_FLIGHT, G_FLIGHT, [F(origin="JFK", date="2024-05-01", passengers=2)]),
    ("MissingRequiredParameter", Q_CURRENCY, G_CURRENCY, [C(source="USD", target="EUR")]),
    ("MissingRequiredParameter", Q_TWO, G_TWO, [W(city="Paris"), C(amount=50, source="EUR")]),
    # an argument the gold does not have
    ("UnexpectedParameter", Q_WEATHER, G_WEATHER, [W(city="Paris", country="France")]),
    ("UnexpectedParameter", Q_CURRENCY, G_CURRENCY, [C(amount=100, source="USD", target="EUR", rate=1.1)]),
    ("UnexpectedParameter", Q_ALARM, G_ALARM, [A(time="07:30", repeat=True, days=["mon"])]),
    ("UnexpectedParameter", Q_FLIGHT, G_FLIGHT,
     [F(origin="JFK", destination="LHR", date="2024-05-01", passengers=2, seat="12A")]),
    # an argument of the wrong JSON type
    ("IncorrectParameterType", Q_FLIGHT, G_FLIGHT, [F(origin="JFK", destination="LHR", date="2024-05-01", passengers="2")]),
    ("IncorrectParameterType", Q_CURRENCY, G_CURRENCY, [C(amount="100", source="USD", target="EUR")]),
    ("IncorrectParameterType", Q_ALARM, G_ALARM, [A(time="07:30", repeat="yes")]),
    ("IncorrectParameterType", Q_FLIGHT, G_FLIGHT, [F(origin="JFK", destination="LHR", date="2024-05-01", passengers=2.5)]),
    # right type, wrong value
    ("IncorrectParameterValue", Q_WEATHER, G_WEATHER, [W(city="London")]),
    ("IncorrectParameterValue", Q_WEATHER, G_WEATHER, [W(city="Paris", unit="fahrenheit")]),
    ("IncorrectParameterValue", Q_FLIGHT, G_FLIGHT, [F(origin="JFK", destination="LHR", date="2024-05-02", passengers=2)]),
    ("IncorrectParameterValue", Q_CURRENCY, G_CURRENCY, [C(amount=150, source="USD", target="EUR")]),
    # a gold-listed argument that the schema marks optional, left out
    ("MissingOptionalParameter", Q_FLIGHT, G_FLIGHT, [F(origin="JFK", destination="LHR", date="2024-05-01")]),
    ("MissingOptionalParameter", Q_ALARM, G_ALARM, [A(time="07:30", label="gym")]),
    ("MissingOptionalParameter", "Paris weather for the next 3 days.",
     [{"get_weather": {"city": ["Paris"], "days": [3]}}], [W(city="Paris")]),
    ("MissingOptionalParameter", "Paris weather in fahrenheit.",
     [{"get_weather": {"city": ["Paris"], "unit": ["fahrenheit"]}}], [W(city="Paris")]),
    # several problems at once: the most severe one is reported
    ("MissingRequiredParameter", Q_FLIGHT, G_FLIGHT, [F(origin="LAX", date="2024-05-01", passengers=2)]),
    ("UnexpectedParameter", Q_CURRENCY, G_CURRENCY, [C(amount="100", source="USD", target="EUR", fee=0)]),
    ("IncorrectParameterType", Q_FLIGHT, G_FLIGHT, [F(origin="SFO", destination="LHR", date="2024-05-01", passengers="two")]),
    ("IncorrectFunctionName", Q_TWO, G_TWO, [W(city="Rome"), {"convert": {"amount": 50}}]),
    ("IncorrectParameterValue", Q_ALARM, G_ALARM, [A(time="07:00", repeat=True)]),
]


def write_jsonl(name, rows):
    with open(HERE / name, "w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False) + "\n")


def taxonomy():
    rows = []
    for i, (label, query, gold, cand) in enumerate(CASES):
        rows.append({
            "id": f"tax-{i:03d}",
            "tools": CATALOG,
            "conversation": user(query),
            "gold": gold,
            "candidate": cand,
            "expected": label,
        })
    write_jsonl("taxonomy.jsonl", rows)


# ---------------------------------------------------------------------------
# Synthetic bench / generation / task corpora
# ---------------------------------------------------------------------------

CITIES = ["Paris", "Berlin", "Tokyo", "Lima", "Cairo", "Oslo", "Perth", "Quito", "Seoul", "Dakar"]
CODES = ["USD", "EUR", "GBP", "JPY", "CHF", "INR", "BRL", "ZAR"]
AIRPORTS = ["JFK", "LHR", "CDG", "NRT", "SYD", "GRU", "DXB", "SIN"]


def random_task(rng):
    """Returns (query, correct call list, gold) for one synthetic request."""
    kind = rng.randrange(4)
    if kind == 0:
        city, days = rng.choice(CITIES), rng.randint(1, 7)
        call = W(city=city, days=days)
        gold = [{"get_weather": {"city": [city], "days": [days], "unit": [""]}}]
        return f"{days}-day forecast for {city}.", [call], gold
    if kind == 1:
        a, b = rng.sample(CODES, 2)
        amount = rng.choice([10, 25, 50, 100, 250, 1000])
        call = C(amount=amount, source=a, target=b)
        gold = [{"convert_currency": {"amount": [amount], "source": [a], "target": [b]}}]
        return f"Convert {amount} {a} to {b}.", [call], gold
    if kind == 2:
        o, d = rng.sample(AIRPORTS, 2)
        date = f"2024-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}"
        n = rng.randint(1, 4)
        call = F(origin=o, destination=d, date=date, passengers=n)
        gold = [{"book_flight": {"origin": [o], "destination": [d], "date": [date], "passengers": [n],
                                 "cabin": [""]}}]
        return f"Fly {n} people from {o} to {d} on {date}.", [call], gold
    hh, mm = rng.randint(5, 9), rng.choice([0, 15, 30, 45])
    t = f"{hh:02d}:{mm:02d}"
    call = A(time=t, repeat=True)
    gold = [{"set_alarm": {"time": [t], "repeat": [True], "label": [""]}}]
    return f"Daily alarm at {t}.", [call], gold


def corrupt(rng, calls):
    """One incorrect variant of a correct call list."""
    name, args = next(iter(calls[0].items()))
    args = dict(args)
    mode = rng.randrange(6)
    if mode == 0:
        key = rng.choice([k for k, v in args.items() if isinstance(v, str)])
        args[key] = args[key] + "x"
        return [{name: args}]
    if mode == 1:
        key = rng.choice(list(args))
        del args[key]
        return [{name: args}]
    if mode == 2:
        args["verbose"] = True
        return [{name: args}]
    if mode == 3:
        return [{name + "_v2": args}]
    if mode == 4:
        return [{name: args}, {name: args}]
    key = rng.choice(list(args))
    args[key] = str(args[key]) if not isinstance(args[key], str) else 7
    return [{name: args}]


def bench(name, count, seed):
    rng = random.Random(seed)
    rows = []
    for i in range(count):
        query, calls, _ = random_task(rng)
        rows.append({
            "id": f"{name}-{i:04d}",
            "tools": CATALOG,
            "conversation": user(query),
            "correct": calls,
            "incorrect": corrupt(rng, calls),
        })
    write_jsonl(f"{name}.jsonl", rows)


def smoke(seed=11, queries=80, per_query=6):
    rng = random.Random(seed)
    gens, tasks = [], []
    models = ["gen-a", "gen-b", "gen-c"]
    for i in range(queries):
        slice_ = ["single", "multi", "irrelevance"][i % 3]
        qid = f"smoke-{i:03d}"
        if slice_ == "irrelevance":
            query, calls, gold = rng.choice(["Tell me a joke.", "Thanks!", "Who wrote Hamlet?"]), [], []
            conversation = user(query)
        else:
            query, calls, gold = random_task(rng)
            conversation = user(query)
            if slice_ == "multi":
                conversation = [
                    {"role": "user", "content": "Hi, I need some help planning."},
                    {"role": "assistant", "content": "Sure, what do you need?"},
                    {"role": "user", "content": query},
                ]
        candidates = []
        for k in range(per_query):
            model = models[k % len(models)]
            roll = rng.random()
            if roll < 0.35:
                text = "```json\n" + json.dumps(calls) + "\n```"
            elif roll < 0.45:
                text = "I'm not sure which tool to use."
            elif not calls:
                text = json.dumps([W(city=rng.choice(CITIES))])
            else:
                text = json.dumps(corrupt(rng, calls))
            candidates.append({"source_model": model, "text": text})
        gens.append({"id": qid, "tools": CATALOG, "conversation": conversation, "candidates": candidates,
                     "gold": gold, "slice": slice_})
        tasks.append({"id": qid, "tools": CATALOG, "conversation": conversation, "gold": gold})
    write_jsonl("smoke_generations.jsonl", gens)
    write_jsonl("smoke_tasks.jsonl", tasks)


if __name__ == "__main__":
    taxonomy()
    bench("bench200", 200, seed=5)
    smoke()
