import { beforeEach, describe, expect, it } from "vitest";

import { LabelSubmission, PendingInstance } from "../src/api.js";
import { renderPendingPanel } from "../src/form.js";
import { displayNumber } from "../src/round.js";

function queryPending(): PendingInstance {
  return {
    instance_id: 42,
    features: { x0: 1.4442500000000001, x1: -0.1875 },
    model_posterior: [0.0625, 0.8125, 0.125],
    model_score: 5,
    query_index: 7,
    phase: "query",
    class_names: ["ant", "bee", "cat"],
  };
}

function seedPending(): PendingInstance {
  return {
    ...queryPending(),
    model_posterior: null,
    model_score: null,
    query_index: null,
    phase: "seed",
  };
}

function mount(
  pending: PendingInstance,
  options: { showModelScore?: boolean } = {},
): { container: HTMLElement; submissions: LabelSubmission[] } {
  const container = document.createElement("div");
  document.body.appendChild(container);
  const submissions: LabelSubmission[] = [];
  renderPendingPanel(container, pending, {
    showModelScore: options.showModelScore ?? true,
    onSubmit: (s) => submissions.push(s),
  });
  return { container, submissions };
}

function submitForm(form: HTMLFormElement): void {
  form.dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
}

function chooseClass(container: HTMLElement, index: number): void {
  const radio = container.querySelector<HTMLInputElement>(
    `#class-opt-${index}`,
  )!;
  radio.checked = true;
  radio.dispatchEvent(new Event("change", { bubbles: true }));
}

function chooseGrade(container: HTMLElement, id: string, value: string): void {
  const select = container.querySelector<HTMLSelectElement>(`#${id}`)!;
  select.value = value;
  select.dispatchEvent(new Event("change", { bubbles: true }));
}

beforeEach(() => {
  document.body.innerHTML = "";
});

describe("pending panel", () => {
  it("shows every feature value in three-decimal display form", () => {
    const { container } = mount(queryPending());
    const cells = [...container.querySelectorAll(".feature-value")].map(
      (el) => el.textContent,
    );
    expect(cells).toEqual(["1.444", "-0.188"]);
  });

  it("renders posterior bars whose shown values sum to one", () => {
    const { container } = mount(queryPending());
    const values = [...container.querySelectorAll(".posterior-value")].map(
      (el) => Number(el.textContent),
    );
    expect(values).toHaveLength(3);
    const sum = values.reduce((a, b) => a + b, 0);
    // each display rounds by at most 0.0005
    expect(Math.abs(sum - 1)).toBeLessThanOrEqual(0.0005 * values.length);
    const widths = [
      ...container.querySelectorAll<HTMLElement>(".posterior-bar"),
    ].map((el) => el.style.width);
    expect(widths).toEqual(["6.25%", "81.25%", "12.5%"]);
    for (const [i, value] of queryPending().model_posterior!.entries()) {
      expect(
        container.querySelectorAll(".posterior-value")[i].textContent,
      ).toBe(displayNumber(value));
    }
  });

  it("shows the model confidence score by default and hides it on request", () => {
    const { container } = mount(queryPending());
    expect(container.querySelector("#model-score")?.textContent).toBe(
      "model confidence: 5 / 5",
    );
    document.body.innerHTML = "";
    const hidden = mount(queryPending(), { showModelScore: false });
    expect(hidden.container.querySelector("#model-score")).toBeNull();
  });

  it("omits posterior and confidence during the seed phase", () => {
    const { container } = mount(seedPending());
    expect(container.querySelector("#posterior-panel")).toBeNull();
    expect(container.querySelector("#model-score")).toBeNull();
    expect(container.querySelector("#pending-heading")?.textContent).toContain(
      "Seed",
    );
  });

  it("keeps submit disabled until both class and z1 are chosen", () => {
    const { container } = mount(queryPending());
    const button = container.querySelector<HTMLButtonElement>("#submit-label")!;
    expect(button.disabled).toBe(true);

    chooseClass(container, 1);
    expect(button.disabled).toBe(true); // class alone is not enough

    chooseGrade(container, "z1-select", "4");
    expect(button.disabled).toBe(false);

    chooseGrade(container, "z1-select", "");
    expect(button.disabled).toBe(true); // deselecting z1 re-disables
  });

  it("submits z2 as null when left at 'not provided'", () => {
    const { container, submissions } = mount(queryPending());
    chooseClass(container, 2);
    chooseGrade(container, "z1-select", "3");
    submitForm(container.querySelector("form")!);
    expect(submissions).toEqual([
      { instance_id: 42, class_index: 2, z1: 3, z2: null },
    ]);
  });

  it("submits the chosen z2 when one is picked", () => {
    const { container, submissions } = mount(queryPending());
    chooseClass(container, 0);
    chooseGrade(container, "z1-select", "5");
    chooseGrade(container, "z2-select", "2");
    submitForm(container.querySelector("form")!);
    expect(submissions).toEqual([
      { instance_id: 42, class_index: 0, z1: 5, z2: 2 },
    ]);
  });

  it("ignores submission attempts while the form is incomplete", () => {
    const { container, submissions } = mount(queryPending());
    submitForm(container.querySelector("form")!);
    chooseClass(container, 1);
    submitForm(container.querySelector("form")!);
    expect(submissions).toEqual([]);
  });

  it("labels z2's resting state as 'not provided'", () => {
    const { container } = mount(queryPending());
    const z2 = container.querySelector<HTMLSelectElement>("#z2-select")!;
    expect(z2.value).toBe("");
    expect(z2.selectedOptions[0].textContent).toBe("not provided");
  });
});
