import type { ActionEntry, ActionParam } from "./types";

/** Serialize one form's values into the wire action-array string. */
export function buildActionArray(
  spec: ActionEntry,
  values: Record<string, string>,
): string {
  const parts: unknown[] = [spec.name];
  const push = (param: ActionParam, raw: string | undefined): boolean => {
    const text = (raw ?? "").trim();
    if (!text) {
      return false;
    }
    if (param.shape === "list") {
      parts.push(
        text
          .split("\n")
          .map((line) => line.trim())
          .filter((line) => line.length > 0),
      );
    } else {
      parts.push(text);
    }
    return true;
  };
  for (const param of spec.required_params) {
    push(param, values[param.name]);
  }
  for (const param of spec.optional_params) {
    if (!push(param, values[param.name])) {
      break; // positional arguments: stop at the first omitted optional
    }
  }
  return JSON.stringify(parts);
}

export interface ActionBuilder {
  root: HTMLElement;
  selectAction(name: string): void;
}

/**
 * One form per catalog entry, generated from /v1/actions metadata, plus a
 * raw-array mode. Exactly one form is visible at a time.
 */
export function renderActionBuilder(
  container: HTMLElement,
  actions: ActionEntry[],
  onSubmit: (actionText: string) => void,
): ActionBuilder {
  const doc = container.ownerDocument;
  const root = doc.createElement("div");
  root.className = "action-builder";

  const picker = doc.createElement("select");
  picker.className = "action-picker";
  for (const spec of actions) {
    const option = doc.createElement("option");
    option.value = spec.name;
    option.textContent = `${spec.name} (${spec.kind})`;
    picker.appendChild(option);
  }
  const rawOption = doc.createElement("option");
  rawOption.value = "__raw__";
  rawOption.textContent = "raw action array";
  picker.appendChild(rawOption);
  root.appendChild(picker);

  const forms = new Map<string, HTMLFormElement>();

  const makeField = (
    form: HTMLFormElement,
    param: ActionParam,
    optional: boolean,
  ): void => {
    const label = doc.createElement("label");
    label.textContent = optional ? `${param.name} (optional)` : param.name;
    const field =
      param.shape === "list"
        ? doc.createElement("textarea")
        : doc.createElement("input");
    field.setAttribute("name", param.name);
    field.setAttribute("data-shape", param.shape);
    if (param.shape === "list") {
      field.setAttribute("placeholder", "one item per line");
    }
    label.appendChild(field);
    form.appendChild(label);
  };

  for (const spec of actions) {
    const form = doc.createElement("form");
    form.className = "action-form";
    form.setAttribute("data-action", spec.name);
    const usage = doc.createElement("p");
    usage.className = "usage";
    usage.textContent = spec.usage;
    form.appendChild(usage);
    const description = doc.createElement("p");
    description.className = "description";
    description.textContent = spec.description;
    form.appendChild(description);
    for (const param of spec.required_params) {
      makeField(form, param, false);
    }
    for (const param of spec.optional_params) {
      makeField(form, param, true);
    }
    const submit = doc.createElement("button");
    submit.type = "submit";
    submit.textContent = "Run";
    form.appendChild(submit);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const values: Record<string, string> = {};
      form
        .querySelectorAll<HTMLInputElement | HTMLTextAreaElement>(
          "input[name], textarea[name]",
        )
        .forEach((field) => {
          values[field.getAttribute("name") ?? ""] = field.value;
        });
      onSubmit(buildActionArray(spec, values));
    });
    forms.set(spec.name, form);
    root.appendChild(form);
  }

  const rawForm = doc.createElement("form");
  rawForm.className = "action-form";
  rawForm.setAttribute("data-action", "__raw__");
  const rawField = doc.createElement("textarea");
  rawField.setAttribute("name", "raw");
  rawField.setAttribute("placeholder", '["get_tables"]');
  rawForm.appendChild(rawField);
  const rawSubmit = doc.createElement("button");
  rawSubmit.type = "submit";
  rawSubmit.textContent = "Run";
  rawForm.appendChild(rawSubmit);
  rawForm.addEventListener("submit", (event) => {
    event.preventDefault();
    if (rawField.value.trim()) {
      onSubmit(rawField.value);
    }
  });
  forms.set("__raw__", rawForm);
  root.appendChild(rawForm);

  const show = (name: string): void => {
    for (const [formName, form] of forms) {
      form.style.display = formName === name ? "" : "none";
    }
  };
  picker.addEventListener("change", () => show(picker.value));
  show(actions.length > 0 ? actions[0].name : "__raw__");

  container.appendChild(root);
  return {
    root,
    selectAction(name: string) {
      picker.value = name;
      show(name);
    },
  };
}
