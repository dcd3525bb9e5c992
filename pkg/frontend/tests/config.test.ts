import { describe, expect, it } from "vitest";

import { buildSessionConfig, parseScheduleText } from "../src/main.js";

describe("parseScheduleText", () => {
  it("parses bare and qualified strategy names", () => {
    expect(parseScheduleText("us")).toEqual([{ kind: "us" }]);
    expect(parseScheduleText("us:margin")).toEqual([
      { kind: "us", measure: "margin" },
    ]);
    expect(parseScheduleText("us:mu")).toEqual([
      { kind: "us", measure: "margin" },
    ]);
    expect(parseScheduleText("us:ec, qbc")).toEqual([
      { kind: "us", measure: "entropy" },
      { kind: "qbc" },
    ]);
    expect(parseScheduleText("dwm:cosine:margin")).toEqual([
      { kind: "dwm", similarity: "cosine", measure: "margin" },
    ]);
  });

  it("rejects unknown strategies and measures", () => {
    expect(() => parseScheduleText("magic")).toThrow("unknown strategy");
    expect(() => parseScheduleText("us:wat")).toThrow(
      "unknown uncertainty measure",
    );
    expect(() => parseScheduleText("  ")).toThrow("at least one strategy");
  });
});

describe("buildSessionConfig", () => {
  it("builds an interactive-session payload with fixed switches when given", () => {
    const config = buildSessionConfig({
      budget: 20,
      fraction: 0.05,
      schedule: "us:margin,qbc",
      switchAt: "10",
      fusion: "conservative",
      seed: 7,
    }) as Record<string, any>;
    expect(config.oracle_mode).toBe("interactive");
    expect(config.rng_seed).toBe(7);
    expect(config.fusion).toBe("conservative");
    expect(config.coldstart).toEqual({ fraction: 0.05 });
    expect(config.policy.budget).toBe(20);
    expect(config.policy.switch_mode).toBe("fixed");
    expect(config.policy.switch_at).toEqual([10]);
    expect(config.policy.schedule).toHaveLength(2);
  });

  it("leaves the switch mode signal-driven when no points are given", () => {
    const config = buildSessionConfig({
      budget: 20,
      fraction: 0.05,
      schedule: "us",
      switchAt: "",
      fusion: "optimistic",
      seed: 0,
    }) as Record<string, any>;
    expect(config.policy.switch_mode).toBeUndefined();
    expect(config.policy.switch_at).toBeUndefined();
  });

  it("rejects non-integer switch points", () => {
    expect(() =>
      buildSessionConfig({
        budget: 20,
        fraction: 0.05,
        schedule: "us,qbc",
        switchAt: "ten",
        fusion: "conservative",
        seed: 0,
      }),
    ).toThrow("switch points");
  });
});
