/**
 * Dependency-free SVG line charts for the metric history.
 *
 * One chart per monitored series (ec, mu, cu, ce) plus the expert-fused
 * learner-confidence series, which always uses the fixed 1–5 axis.  Strategy
 * switches are drawn as vertical dashed markers at the query index where the
 * schedule advanced.  Axis labels reuse the half-even display formatting so
 * everything readable on screen matches the API values.
 */

import { MetricSnapshot } from "./api.js";
import { displayNumber } from "./round.js";

const SVG_NS = "http://www.w3.org/2000/svg";

const WIDTH = 360;
const HEIGHT = 200;
const MARGIN = { top: 26, right: 12, bottom: 24, left: 52 };

export interface ChartSpec {
  title: string;
  xs: number[];
  ys: number[];
  /** Fixed y-axis range; when absent the range fits the data with padding. */
  yDomain?: [number, number];
  /** Query indices at which the strategy schedule advanced. */
  switches?: number[];
}

function svgElement<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [name, value] of Object.entries(attrs)) {
    el.setAttribute(name, value);
  }
  return el;
}

function spanOf(values: number[], padFraction: number): [number, number] {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (lo === hi) {
    // degenerate (single point or flat series): open up a visible band
    const pad = Math.max(0.5, Math.abs(lo) * 0.1);
    return [lo - pad, hi + pad];
  }
  const pad = (hi - lo) * padFraction;
  return [lo - pad, hi + pad];
}

/** Build one line chart as a detached `<svg>` element. */
export function renderLineChart(spec: ChartSpec): SVGSVGElement {
  const { xs, ys } = spec;
  if (xs.length !== ys.length || xs.length === 0) {
    throw new Error("chart needs matching, non-empty x and y series");
  }
  const [x0, x1] = spanOf(xs, 0);
  const [y0, y1] = spec.yDomain ?? spanOf(ys, 0.08);
  const innerW = WIDTH - MARGIN.left - MARGIN.right;
  const innerH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const xSpan = x1 - x0 || 1;
  const ySpan = y1 - y0 || 1;
  const toX = (x: number) => MARGIN.left + ((x - x0) / xSpan) * innerW;
  const toY = (y: number) => MARGIN.top + (1 - (y - y0) / ySpan) * innerH;

  const svg = svgElement("svg", {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    class: "metric-chart",
    role: "img",
    "data-title": spec.title,
  });
  svg.appendChild(
    svgElement("title"),
  ).textContent = `${spec.title} by query index`;

  const titleText = svgElement("text", {
    x: String(MARGIN.left),
    y: "16",
    class: "chart-title",
  });
  titleText.textContent = spec.title;
  svg.appendChild(titleText);

  // frame
  svg.appendChild(
    svgElement("rect", {
      x: String(MARGIN.left),
      y: String(MARGIN.top),
      width: String(innerW),
      height: String(innerH),
      class: "chart-frame",
      fill: "none",
    }),
  );

  // y-axis extremes
  for (const [value, anchor] of [
    [y1, MARGIN.top + 4],
    [y0, MARGIN.top + innerH],
  ] as const) {
    const label = svgElement("text", {
      x: String(MARGIN.left - 6),
      y: String(anchor),
      "text-anchor": "end",
      class: "axis-label",
    });
    label.textContent = displayNumber(value);
    svg.appendChild(label);
  }

  // x-axis extremes
  for (const [value, xPos, anchor] of [
    [xs[0], toX(xs[0]), "start"],
    [xs[xs.length - 1], toX(xs[xs.length - 1]), "end"],
  ] as const) {
    const label = svgElement("text", {
      x: String(xPos),
      y: String(HEIGHT - 8),
      "text-anchor": anchor,
      class: "axis-label",
    });
    label.textContent = String(value);
    svg.appendChild(label);
  }

  // strategy-switch markers
  for (const at of spec.switches ?? []) {
    if (at < x0 || at > x1) {
      continue;
    }
    const xPos = toX(at);
    svg.appendChild(
      svgElement("line", {
        x1: String(xPos),
        x2: String(xPos),
        y1: String(MARGIN.top),
        y2: String(MARGIN.top + innerH),
        class: "switch-marker",
        "stroke-dasharray": "4 3",
        "data-query-index": String(at),
      }),
    );
  }

  // the series itself
  const points = xs
    .map((x, i) => `${toX(x).toFixed(2)},${toY(ys[i]).toFixed(2)}`)
    .join(" ");
  svg.appendChild(
    svgElement("polyline", { points, class: "series-line", fill: "none" }),
  );
  xs.forEach((x, i) => {
    svg.appendChild(
      svgElement("circle", {
        cx: toX(x).toFixed(2),
        cy: toY(ys[i]).toFixed(2),
        r: "2.5",
        class: "series-point",
        "data-x": String(x),
        "data-y": String(ys[i]),
      }),
    );
  });

  return svg;
}

const POOL_SERIES = ["ec", "mu", "cu", "ce"] as const;

/** Axis bounds for the expert-fused confidence score. */
export const CONFIDENCE_DOMAIN: [number, number] = [1, 5];

/** Replace `container`'s content with the full set of metric charts. */
export function renderMetricsPanel(
  container: HTMLElement,
  snapshots: MetricSnapshot[],
  switches: number[],
): void {
  container.textContent = "";
  if (snapshots.length === 0) {
    const empty = document.createElement("p");
    empty.className = "charts-empty";
    empty.textContent = "No metric snapshots yet.";
    container.appendChild(empty);
    return;
  }
  const xs = snapshots.map((s) => s.query_index);
  for (const name of POOL_SERIES) {
    container.appendChild(
      renderLineChart({
        title: name,
        xs,
        ys: snapshots.map((s) => s[name]),
        switches,
      }),
    );
  }
  container.appendChild(
    renderLineChart({
      title: "s_al",
      xs,
      ys: snapshots.map((s) => s.s_al),
      yDomain: CONFIDENCE_DOMAIN,
      switches,
    }),
  );
}
