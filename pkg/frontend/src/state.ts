// Session view state and rendering helpers. Pure functions only: the DOM
// layer and the tests both consume these, so nothing here may fabricate a
// turn that the server transcript does not contain.

import type { StructuredTranscript, TurnPayload } from "./api.js"

export interface SessionView {
  sessionId: string
  status: string
  turns: TurnPayload[]
  banner: string | null
}

export function emptyView(sessionId: string): SessionView {
  return { sessionId, status: "active", turns: [], banner: null }
}

export function viewFromTranscript(
  sessionId: string,
  transcript: StructuredTranscript,
): SessionView {
  const turns = [...transcript.turns].sort((a, b) => a.index - b.index)
  return { sessionId, status: transcript.status, turns, banner: null }
}

// Merge turns by index: the server copy wins so an optimistic operator turn
// is replaced by the reconciled one, never duplicated.
export function mergeTurns(view: SessionView, incoming: TurnPayload[]): SessionView {
  const byIndex = new Map<number, TurnPayload>()
  for (const turn of view.turns) byIndex.set(turn.index, turn)
  for (const turn of incoming) byIndex.set(turn.index, turn)
  const turns = [...byIndex.values()].sort((a, b) => a.index - b.index)
  return { ...view, turns }
}

export function sameTurnList(a: TurnPayload[], b: TurnPayload[]): boolean {
  if (a.length !== b.length) return false
  return a.every((turn, i) => {
    const other = b[i]
    return (
      turn.index === other.index &&
      turn.origin === other.origin &&
      turn.text === other.text &&
      turn.speaker_labels.length === other.speaker_labels.length &&
      turn.speaker_labels.every((label, j) => label === other.speaker_labels[j])
    )
  })
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
}

export function renderTurnHtml(turn: TurnPayload): string {
  const side = turn.origin === "operator" ? "turn-operator" : "turn-model"
  const labels = turn.speaker_labels
    .map((label) => `<span class="label">${escapeHtml(label)}</span>`)
    .join("")
  const badge = turn.origin === "operator" ? "OPERATOR" : "MODEL"
  return (
    `<div class="turn ${side}" data-index="${turn.index}">` +
    `<div class="meta"><span class="origin">${badge}</span>${labels}</div>` +
    `<pre class="text">${escapeHtml(turn.text)}</pre>` +
    `</div>`
  )
}

export function renderSessionHtml(view: SessionView): string {
  const turns = view.turns.map(renderTurnHtml).join("\n")
  const banner = view.banner
    ? `<div class="banner">${escapeHtml(view.banner)}</div>`
    : ""
  return `${banner}<div class="turns">${turns}</div>`
}
