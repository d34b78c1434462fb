#!/usr/bin/env python3
"""Drive a discovery session over the HTTP service, as the workbench does."""

import json
import urllib.request

from adaptmine.service import ServiceConfig, serve
from adaptmine.session import STEPS
from adaptmine.synthetic import default_spec, generate_synthetic

kb, _ = generate_synthetic(default_spec(60, seed=5, prevalence=0.1))
service = serve(ServiceConfig(kb=kb, port=0))
service.start()
host, port = service.address
base = f"http://{host}:{port}"
print(f"service on {base}, token {service.token[:8]}...")


def call(method, path, payload=None):
    data = json.dumps(payload).encode() if payload is not None else None
    req = urllib.request.Request(base + path, data=data, method=method)
    req.add_header("Content-Type", "application/json")
    req.add_header("X-Session-Token", service.token)
    with urllib.request.urlopen(req) as resp:
        return json.loads(resp.read())


call("PUT", "/api/params", {"sigma": 0.1})
for step in STEPS:
    call("POST", f"/api/steps/{step}/run", {"wait": True})
    print(f"  ran {step}")

fcis = call("GET", "/api/fcis?sort=support&page_size=3")
print(f"\n{fcis['total']} itemsets after filtering; top entries:")
for row in fcis["fcis"]:
    print(f"  support={row['support_count']:5d}  items={row['item_count']}")

made = call("POST", "/api/rules", {"fci_id": fcis["fcis"][0]["fci_id"]})
call("POST", f"/api/rules/{made['id']}/validate",
     {"verdict": "validated", "explanation": "demo validation"})
print(f"\nvalidated rule {made['id']}")

service.stop()
print("service stopped")
