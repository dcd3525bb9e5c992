/**
 * Half-even decimal formatting.
 *
 * Every number shown in the annotator must equal the server's value rounded
 * to three decimals with ties going to the even digit — the same convention
 * the server uses when it formats numbers itself.  Doing this correctly in
 * JavaScript needs care: naive `value.toFixed(3)` rounds half *away from
 * zero* on some engines and, worse, decides ties on the binary double rather
 * than its exact decimal expansion.
 *
 * The approach here is exact.  `Number.prototype.toFixed` with a large digit
 * count is specified to produce the correctly-rounded decimal string, and 80
 * fractional digits is enough to hold the *entire* expansion of any double
 * whose third-decimal rounding is not trivially zero (a double below 2^-26
 * prints as 0.000 regardless).  With the full expansion in hand as a string,
 * rounding is digit arithmetic: look at everything past the third decimal,
 * round up, down, or — on an exact tie — toward the even digit.
 */

const DIGITS = 3;

/** Format a finite number to exactly three decimals, rounding half to even. */
export function displayNumber(value: number): string {
  if (!Number.isFinite(value)) {
    return String(value);
  }
  const negative = value < 0;
  const abs = Math.abs(value);
  if (abs >= 1e21) {
    // toFixed switches to exponential form up here; metric values never do.
    return String(value);
  }
  const expansion = abs.toFixed(80);
  const dot = expansion.indexOf(".");
  const intPart = expansion.slice(0, dot);
  const frac = expansion.slice(dot + 1);
  const kept = frac.slice(0, DIGITS);
  const rest = frac.slice(DIGITS).replace(/0+$/, "");

  let roundUp: boolean;
  if (rest === "") {
    roundUp = false; // nothing beyond the kept digits
  } else if (rest[0] > "5") {
    roundUp = true;
  } else if (rest[0] < "5") {
    roundUp = false;
  } else if (rest.length > 1) {
    roundUp = true; // strictly above the halfway point
  } else {
    // exact tie: round toward the even last digit
    roundUp = (kept.charCodeAt(DIGITS - 1) - 48) % 2 === 1;
  }

  let units = BigInt(intPart + kept);
  if (roundUp) {
    units += 1n;
  }
  const text = units.toString().padStart(DIGITS + 1, "0");
  const body = `${text.slice(0, -DIGITS)}.${text.slice(-DIGITS)}`;
  return negative && units !== 0n ? `-${body}` : body;
}

/** Parse a string produced by {@link displayNumber} back into a number. */
export function parseDisplayed(text: string): number {
  return Number.parseFloat(text);
}
