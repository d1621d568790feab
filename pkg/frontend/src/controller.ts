// Async flows between the API client and the view state. The browser layer
// and the node tests share these so steering behavior is tested without a DOM.

import { ApiError, ScenarioApi, ScenarioSpecPayload } from "./api.js"
import { SessionView, emptyView, mergeTurns, viewFromTranscript } from "./state.js"

export const CONTINUE_SENTINEL = "..."

export async function createSessionView(
  api: ScenarioApi,
  spec: ScenarioSpecPayload,
): Promise<SessionView> {
  const handle = await api.createSession(spec)
  const view = emptyView(handle.session_id)
  return refreshView(api, view)
}

// Poll reconciliation: rebuild the turn list from the server transcript.
export async function refreshView(api: ScenarioApi, view: SessionView): Promise<SessionView> {
  const transcript = await api.structuredTranscript(view.sessionId)
  const fresh = viewFromTranscript(view.sessionId, transcript)
  return { ...fresh, banner: view.banner }
}

async function applyTurn(
  api: ScenarioApi,
  view: SessionView,
  send: () => Promise<unknown>,
): Promise<SessionView> {
  try {
    await send()
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) {
      return { ...view, status: "stopped", banner: "session stopped" }
    }
    throw err
  }
  return refreshView(api, view)
}

export async function sendNudge(
  api: ScenarioApi,
  view: SessionView,
  text: string,
): Promise<SessionView> {
  // optimistic operator turn; replaced by the server copy on reconcile
  const optimistic = mergeTurns(view, [
    { index: view.turns.length, origin: "operator", text, speaker_labels: [] },
  ])
  return applyTurn(api, optimistic, () => api.nudge(view.sessionId, text))
}

export async function sendContinue(api: ScenarioApi, view: SessionView): Promise<SessionView> {
  const optimistic = mergeTurns(view, [
    { index: view.turns.length, origin: "operator", text: CONTINUE_SENTINEL, speaker_labels: [] },
  ])
  return applyTurn(api, optimistic, () => api.continueSession(view.sessionId))
}

export async function stopView(api: ScenarioApi, view: SessionView): Promise<SessionView> {
  await api.stopSession(view.sessionId)
  return { ...view, status: "stopped" }
}

export function validateSpecForm(spec: ScenarioSpecPayload): string | null {
  if (!spec.setting.trim()) return "setting must not be empty"
  if (spec.personae.length === 0) return "add at least one persona"
  if (spec.personae.some((p) => !p.speaking_label.trim())) {
    return "every persona needs a speaking label"
  }
  const hasLabel = spec.personae.some((p) =>
    spec.opening_direction.includes(p.speaking_label),
  )
  if (!hasLabel) return "the opening direction must name a persona's speaking label"
  return null
}
