"""Slot extraction on a range of handover requests.

Run: python demos/02_language_parsing.py
"""
from handover_sim.parsing import default_lexicon, parse

SENTENCES = [
    "Give me the wooden hammer.",
    "Hand over the cup to me.",
    "Pass the toy plane over.",
    "I want the orange",
    "Hand me the mustard bottle by grabbing the tip.",
    "Grab the screwdriver's shaft.",
    "Deliver me the frying pan so I can hold the handle.",
    "I want to hold the apple by the stem.",
    "Give me the knife by its handle.",
    # beyond the fixtures
    "Hand me the mug and I want to hold the handle",
    "bring me the red flashlight",
    "fetch the scissors by gripping the blades",
]

lexicon = default_lexicon()
print(f"{'sentence':<55} {'object':<16} {'part':<8} holder")
print("-" * 90)
for sentence in SENTENCES:
    cmd = parse(sentence, lexicon)
    part = cmd.part or "-"
    print(f"{sentence:<55} {cmd.object_phrase:<16} {part:<8} {cmd.holder}")
