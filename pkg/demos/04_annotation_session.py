"""
Walk one annotator through a two-phase scoring session
======================================================

Everything runs in process here.  `infolab serve` exposes the same
store over HTTP for the browser UI; the payloads below are exactly what
the endpoints return.
"""

from infolab.annoserve import AnnotationStore, AnnotationTask

tasks = [
    AnnotationTask("fog-0001", ("thick", "fog", "hid", "the", "coast"), 1,
                   "NOUN"),
    AnnotationTask("fog-0002", ("we", "waited", "for", "the", "fog"), 4,
                   "NOUN"),
]
store = AnnotationStore({"demo": tasks})
sid = store.create_session("pat", "two_phase", "demo", seed=1).session_id

while True:
    payload = store.next_task(sid)
    if payload["done"]:
        print(f"done, {payload['completed']} of {payload['total']} tasks")
        break
    tid = payload["task_id"]
    print(f"{tid} [{payload['phase']}]", " ".join(payload["tokens"]))

    # first judgement is made blind, the slot stays masked
    store.submit_score(sid, tid, "info1", 6)
    store.reveal(sid, tid)
    revealed = store.next_task(sid)
    print(f"{tid} [{revealed['phase']}]", " ".join(revealed["tokens"]),
          "<- target:", revealed["target"])
    store.submit_score(sid, tid, "info2", 8)

# the append-only record stream is the exchange format
print()
print(store.export("demo"), end="")
