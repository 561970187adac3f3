import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { toCandidateRow } from "../src/model.js";
import { FakeService } from "./fake_service.js";
import { VECMUL_POINT, makePoint } from "./fixtures.js";

function clientFor(service: FakeService): ApiClient {
  return new ApiClient("http://fake", service.fetch);
}

describe("verdict round-trip", () => {
  it("posting a verdict yields a record retrievable via ?verdict=", async () => {
    const service = new FakeService();
    service.seed(VECMUL_POINT);
    const client = clientFor(service);

    await client.submitVerdict(VECMUL_POINT.point_id, "rejected", "bank conflict on Z");

    const rejected = await client.listDataPoints({ verdict: "rejected" });
    expect(rejected).toHaveLength(1);
    expect(rejected[0].source).toBe("human");
    expect(rejected[0].design_id).toBe(VECMUL_POINT.design_id);
    expect(rejected[0].rationale).toBe("bank conflict on Z");
    // the committed record carries the original's metrics untouched
    expect(rejected[0].metrics).toEqual(VECMUL_POINT.metrics);
  });

  it("row state matches on reload: a fresh client sees identical rows", async () => {
    const service = new FakeService();
    service.seed(VECMUL_POINT);
    await clientFor(service).submitVerdict(VECMUL_POINT.point_id, "accepted", "ok");

    const firstLoad = (await clientFor(service).listDataPoints()).map(toCandidateRow);
    const reload = (await clientFor(service).listDataPoints()).map(toCandidateRow);
    expect(reload).toEqual(firstLoad);
    expect(firstLoad.some((r) => r.verdict === "accepted")).toBe(true);
  });

  it("is idempotent under retry with an identical body", async () => {
    const service = new FakeService();
    service.seed(VECMUL_POINT);
    const client = clientFor(service);
    await client.submitVerdict(VECMUL_POINT.point_id, "rejected", "dup");
    await client.submitVerdict(VECMUL_POINT.point_id, "rejected", "dup");
    expect(await client.listDataPoints({ verdict: "rejected" })).toHaveLength(1);
  });
});

describe("error surfacing", () => {
  it("raises ApiError with the service's code and message", async () => {
    const service = new FakeService();
    const client = clientFor(service);
    const failure = client.submitVerdict("no-such-point", "accepted", "");
    await expect(failure).rejects.toBeInstanceOf(ApiError);
    await expect(failure).rejects.toMatchObject({ status: 404, code: "unknown_point" });
  });

  it("rejects an unknown verdict value", async () => {
    const service = new FakeService();
    service.seed(VECMUL_POINT);
    const bad = clientFor(service).submitVerdict(
      VECMUL_POINT.point_id,
      // bypass the compile-time union to exercise the wire-level check
      "maybe" as unknown as "accepted",
      "",
    );
    await expect(bad).rejects.toMatchObject({ status: 400, code: "invalid_request" });
  });
});

describe("datapoint queries", () => {
  it("passes filters through and respects the limit", async () => {
    const service = new FakeService();
    service.seed(
      VECMUL_POINT,
      makePoint({
        point_id: "zz-infeasible",
        metrics: { ...VECMUL_POINT.metrics, feasible: false },
      }),
    );
    const client = clientFor(service);
    expect(await client.listDataPoints({ feasible: true })).toHaveLength(1);
    expect(await client.listDataPoints({ limit: 1 })).toHaveLength(1);
  });
});
