/**
 * The pending-instance panel: feature table, model posterior bars, model
 * confidence readout, and the label form.
 *
 * Form rules:
 *  - submit stays disabled until both a class and a self-assessment grade
 *    (z1) are chosen;
 *  - the difficulty grade (z2) defaults to "not provided" and is sent as
 *    null unless the annotator picks a value;
 *  - displayed numbers come from the API payload through the shared
 *    half-even formatter, never recomputed.
 */

import { LabelSubmission, PendingInstance } from "./api.js";
import { displayNumber } from "./round.js";

export interface PendingPanelOptions {
  /** Show the model's 1–5 confidence score next to the posterior. */
  showModelScore: boolean;
  onSubmit: (submission: LabelSubmission) => void;
}

const GRADES = [1, 2, 3, 4, 5];

function featureTable(features: Record<string, number>): HTMLTableElement {
  const table = document.createElement("table");
  table.id = "feature-table";
  const head = table.createTHead().insertRow();
  for (const text of ["feature", "value"]) {
    const cell = document.createElement("th");
    cell.textContent = text;
    head.appendChild(cell);
  }
  const body = table.createTBody();
  for (const [name, value] of Object.entries(features)) {
    const row = body.insertRow();
    row.insertCell().textContent = name;
    const valueCell = row.insertCell();
    valueCell.className = "feature-value";
    valueCell.textContent = displayNumber(value);
  }
  return table;
}

function posteriorPanel(
  posterior: number[],
  classNames: string[],
): HTMLDivElement {
  const panel = document.createElement("div");
  panel.id = "posterior-panel";
  const heading = document.createElement("h3");
  heading.textContent = "model posterior";
  panel.appendChild(heading);
  posterior.forEach((p, index) => {
    const row = document.createElement("div");
    row.className = "posterior-row";

    const name = document.createElement("span");
    name.className = "posterior-name";
    name.textContent = classNames[index] ?? `class ${index}`;
    row.appendChild(name);

    const track = document.createElement("div");
    track.className = "posterior-track";
    const bar = document.createElement("div");
    bar.className = "posterior-bar";
    bar.style.width = `${Math.max(0, Math.min(1, p)) * 100}%`;
    track.appendChild(bar);
    row.appendChild(track);

    const value = document.createElement("span");
    value.className = "posterior-value";
    value.textContent = displayNumber(p);
    row.appendChild(value);

    panel.appendChild(row);
  });
  return panel;
}

function gradeSelect(
  id: string,
  placeholder: string,
  placeholderSelectable: boolean,
): HTMLSelectElement {
  const select = document.createElement("select");
  select.id = id;
  const blank = document.createElement("option");
  blank.value = "";
  blank.textContent = placeholder;
  if (!placeholderSelectable) {
    blank.disabled = true;
  }
  blank.selected = true;
  select.appendChild(blank);
  for (const grade of GRADES) {
    const option = document.createElement("option");
    option.value = String(grade);
    option.textContent = String(grade);
    select.appendChild(option);
  }
  return select;
}

/** Render the pending instance and its label form into `container`. */
export function renderPendingPanel(
  container: HTMLElement,
  pending: PendingInstance,
  options: PendingPanelOptions,
): void {
  container.textContent = "";

  const heading = document.createElement("h2");
  heading.id = "pending-heading";
  heading.textContent =
    pending.phase === "seed"
      ? `Seed instance #${pending.instance_id}`
      : `Query ${pending.query_index} — instance #${pending.instance_id}`;
  container.appendChild(heading);

  container.appendChild(featureTable(pending.features));

  if (pending.model_posterior !== null) {
    container.appendChild(
      posteriorPanel(pending.model_posterior, pending.class_names),
    );
  }
  if (options.showModelScore && pending.model_score !== null) {
    const score = document.createElement("p");
    score.id = "model-score";
    score.textContent = `model confidence: ${pending.model_score} / 5`;
    container.appendChild(score);
  }

  const form = document.createElement("form");
  form.id = "label-form";

  const classFieldset = document.createElement("fieldset");
  classFieldset.id = "class-choices";
  const legend = document.createElement("legend");
  legend.textContent = "class";
  classFieldset.appendChild(legend);
  pending.class_names.forEach((name, index) => {
    const labelEl = document.createElement("label");
    const radio = document.createElement("input");
    radio.type = "radio";
    radio.name = "class_index";
    radio.value = String(index);
    radio.id = `class-opt-${index}`;
    labelEl.appendChild(radio);
    labelEl.appendChild(document.createTextNode(` ${name}`));
    classFieldset.appendChild(labelEl);
  });
  form.appendChild(classFieldset);

  const z1Label = document.createElement("label");
  z1Label.textContent = "confidence in this label (z1) ";
  const z1 = gradeSelect("z1-select", "choose…", false);
  z1Label.appendChild(z1);
  form.appendChild(z1Label);

  const z2Label = document.createElement("label");
  z2Label.textContent = "difficulty of this instance (z2) ";
  const z2 = gradeSelect("z2-select", "not provided", true);
  z2Label.appendChild(z2);
  form.appendChild(z2Label);

  const submit = document.createElement("button");
  submit.type = "submit";
  submit.id = "submit-label";
  submit.textContent = pending.phase === "seed" ? "label seed" : "submit label";
  submit.disabled = true;
  form.appendChild(submit);

  const currentSubmission = (): LabelSubmission | null => {
    const chosen = form.querySelector<HTMLInputElement>(
      "input[name=class_index]:checked",
    );
    if (chosen === null || z1.value === "") {
      return null;
    }
    return {
      instance_id: pending.instance_id,
      class_index: Number(chosen.value),
      z1: Number(z1.value),
      z2: z2.value === "" ? null : Number(z2.value),
    };
  };

  const syncDisabled = () => {
    submit.disabled = currentSubmission() === null;
  };
  form.addEventListener("change", syncDisabled);

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const submission = currentSubmission();
    if (submission !== null) {
      options.onSubmit(submission);
    }
  });

  container.appendChild(form);
}
