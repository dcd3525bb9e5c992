import { describe, expect, it } from "vitest";

import { displayNumber, parseDisplayed } from "../src/round.js";

// Golden values frozen from an independent decimal implementation of
// round-half-even at three digits (exact over the double's expansion).
const GOLDEN: Array<[number, string]> = [
  [2.8125, "2.812"], // exact tie, last kept digit even -> down
  [0.0625, "0.062"],
  [0.1875, "0.188"], // exact tie, last kept digit odd -> up
  [4.6875, "4.688"],
  [0.3125, "0.312"],
  [1.0005, "1.000"], // looks like a tie, but the double sits just below it
  [2.0004999999999997, "2.000"],
  [0.9995, "1.000"], // the double sits just above the tie
  [0.0005, "0.001"],
  [2.675, "2.675"],
  [1.44425, "1.444"],
  [2.6666666666666665, "2.667"],
  [0.0004999999999999999, "0.000"],
  [1e-9, "0.000"],
  [3.0615, "3.062"],
  [4.98, "4.980"],
  [1.23456, "1.235"],
  [0.5, "0.500"],
  [5, "5.000"],
  [0, "0.000"],
  [12.34567, "12.346"],
  [-2.8125, "-2.812"],
  [-0.1875, "-0.188"],
  [-0.0005, "-0.001"],
  [-1e-9, "0.000"], // never render negative zero
];

describe("displayNumber", () => {
  it("matches the frozen golden table", () => {
    for (const [value, expected] of GOLDEN) {
      expect(displayNumber(value), `displayNumber(${value})`).toBe(expected);
    }
  });

  it("always renders exactly three decimals", () => {
    const values = [0, 1, -1, 0.1, 123.456, 1e-12, 999.9995, -42.1];
    for (const value of values) {
      expect(displayNumber(value)).toMatch(/^-?\d+\.\d{3}$/);
    }
  });

  it("stays within half an ulp-of-display of the input", () => {
    let state = 123456789;
    const next = () => {
      // small deterministic LCG; plenty for a smoke sweep
      state = (state * 1103515245 + 12345) % 2147483648;
      return state / 2147483648;
    };
    for (let i = 0; i < 2000; i++) {
      const value = (next() - 0.5) * 200;
      const shown = parseDisplayed(displayNumber(value));
      expect(Math.abs(shown - value)).toBeLessThanOrEqual(0.0005 + 1e-12);
    }
  });

  it("rounds exact sixteenths to the even third decimal", () => {
    // n/16 with odd n are the doubles whose third decimal is an exact tie
    for (let n = 1; n < 160; n += 2) {
      const value = n / 16;
      const shown = displayNumber(value);
      const lastDigit = Number(shown[shown.length - 1]);
      expect(lastDigit % 2, `displayNumber(${n}/16) = ${shown}`).toBe(0);
    }
  });

  it("passes infinities and NaN through as plain strings", () => {
    expect(displayNumber(Number.POSITIVE_INFINITY)).toBe("Infinity");
    expect(displayNumber(Number.NaN)).toBe("NaN");
  });
});
