// Chat transcript rendering. Rebuilt from the store's turn list on every
// change — the list is short-lived session state, not worth diffing.

import { ChatTurn } from "./store";

export function renderChat(container: HTMLElement, turns: ChatTurn[]): void {
  const doc = container.ownerDocument;
  container.textContent = "";
  for (const turn of turns) {
    const bubble = doc.createElement("div");
    bubble.className = `bubble ${turn.role}` + (turn.pending ? " pending" : "");
    const text = doc.createElement("div");
    text.className = "bubble-text";
    text.textContent = turn.text;
    bubble.appendChild(text);
    if (turn.intentLabel) {
      const chip = doc.createElement("div");
      chip.className = "intent-chip";
      const slots = turn.intentSlots ?? {};
      const slotText = Object.entries(slots)
        .map(([k, v]) => `${k}=${v}`)
        .join(", ");
      chip.textContent = slotText ? `${turn.intentLabel} · ${slotText}` : turn.intentLabel;
      bubble.appendChild(chip);
    }
    container.appendChild(bubble);
  }
  container.scrollTop = container.scrollHeight;
}
