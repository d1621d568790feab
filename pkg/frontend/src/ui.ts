// Browser wiring: scenario form, turn list with polling refresh, steering
// controls, and transcript downloads. All state transitions go through
// controller.ts; this file only reads inputs and paints HTML.

import { ScenarioApi, ScenarioSpecPayload } from "./api.js"
import {
  createSessionView,
  refreshView,
  sendContinue,
  sendNudge,
  stopView,
  validateSpecForm,
} from "./controller.js"
import { SessionView, renderSessionHtml, sameTurnList } from "./state.js"

const POLL_INTERVAL_MS = 1500

let api = new ScenarioApi(window.location.origin)
let view: SessionView | null = null
let pollTimer: number | undefined

function element<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id)
  if (!found) throw new Error(`missing element #${id}`)
  return found as T
}

function readSpecForm(): ScenarioSpecPayload {
  const personae = []
  for (const row of document.querySelectorAll<HTMLElement>(".persona-row")) {
    const name = row.querySelector<HTMLInputElement>(".persona-name")!.value.trim()
    const label = row.querySelector<HTMLInputElement>(".persona-label")!.value.trim()
    const epithet = row.querySelector<HTMLInputElement>(".persona-epithet")!.value.trim()
    if (name || label) {
      personae.push({ name, epithet, speaking_label: label })
    }
  }
  const lines = (id: string) =>
    element<HTMLTextAreaElement>(id)
      .value.split("\n")
      .map((line) => line.trim())
      .filter(Boolean)
  return {
    title: element<HTMLInputElement>("field-title").value.trim(),
    setting: element<HTMLTextAreaElement>("field-setting").value.trim(),
    topical_brief: element<HTMLTextAreaElement>("field-brief").value.trim(),
    props: lines("field-props"),
    personae,
    opening_direction: element<HTMLTextAreaElement>("field-opening").value.trim(),
    formatting_directives: lines("field-directives"),
  }
}

function paint(): void {
  if (!view) return
  element("session-panel").hidden = false
  element("turns-host").innerHTML = renderSessionHtml(view)
  element("session-status").textContent = view.status
  const stopped = view.status !== "active"
  element<HTMLInputElement>("nudge-input").disabled = stopped
  element<HTMLButtonElement>("nudge-send").disabled = stopped
  element<HTMLButtonElement>("continue-btn").disabled = stopped
  const host = element("turns-host")
  host.scrollTop = host.scrollHeight
}

function showError(message: string): void {
  const box = element("error-box")
  box.textContent = message
  box.hidden = !message
}

async function guard(action: () => Promise<void>): Promise<void> {
  try {
    showError("")
    await action()
  } catch (err) {
    showError(err instanceof Error ? err.message : String(err))
  }
  paint()
}

function startPolling(): void {
  if (pollTimer !== undefined) window.clearInterval(pollTimer)
  pollTimer = window.setInterval(async () => {
    if (!view || view.status !== "active") return
    try {
      const fresh = await refreshView(api, view)
      if (!sameTurnList(fresh.turns, view.turns) || fresh.status !== view.status) {
        view = fresh
        paint()
      }
    } catch {
      // transient poll failures are retried on the next tick
    }
  }, POLL_INTERVAL_MS)
}

function download(name: string, content: string, mime: string): void {
  const blob = new Blob([content], { type: mime })
  const anchor = document.createElement("a")
  anchor.href = URL.createObjectURL(blob)
  anchor.download = name
  anchor.click()
  URL.revokeObjectURL(anchor.href)
}

function addPersonaRow(name = "", label = "", epithet = ""): void {
  const row = document.createElement("div")
  row.className = "persona-row"
  row.innerHTML =
    '<input class="persona-name" placeholder="Name">' +
    '<input class="persona-label" placeholder="SPEAKING LABEL">' +
    '<input class="persona-epithet" placeholder="One-line expertise">'
  element("personae-host").appendChild(row)
  row.querySelector<HTMLInputElement>(".persona-name")!.value = name
  row.querySelector<HTMLInputElement>(".persona-label")!.value = label
  row.querySelector<HTMLInputElement>(".persona-epithet")!.value = epithet
}

export function boot(): void {
  const baseField = element<HTMLInputElement>("field-base-url")
  baseField.value = window.location.origin
  addPersonaRow("Richard Feynman", "FEYNMAN", "quantum mechanics and path integrals")
  addPersonaRow("Emmy Noether", "NOETHER", "symmetries and conservation laws")

  element("add-persona").addEventListener("click", () => addPersonaRow())

  element("create-session").addEventListener("click", () =>
    guard(async () => {
      api = new ScenarioApi(baseField.value.trim() || window.location.origin)
      const spec = readSpecForm()
      const problem = validateSpecForm(spec)
      if (problem) {
        showError(problem)
        return
      }
      view = await createSessionView(api, spec)
      startPolling()
    }),
  )

  element("nudge-send").addEventListener("click", () =>
    guard(async () => {
      const input = element<HTMLInputElement>("nudge-input")
      if (!view || !input.value.trim()) return
      view = await sendNudge(api, view, input.value)
      input.value = ""
    }),
  )

  element("continue-btn").addEventListener("click", () =>
    guard(async () => {
      if (!view) return
      view = await sendContinue(api, view)
    }),
  )

  element("stop-btn").addEventListener("click", () =>
    guard(async () => {
      if (!view) return
      view = await stopView(api, view)
    }),
  )

  element("export-plain").addEventListener("click", () =>
    guard(async () => {
      if (!view) return
      download("transcript.txt", await api.transcript(view.sessionId, "plain"), "text/plain")
    }),
  )

  element("export-structured").addEventListener("click", () =>
    guard(async () => {
      if (!view) return
      download(
        "transcript.json",
        await api.transcript(view.sessionId, "structured"),
        "application/json",
      )
    }),
  )
}

document.addEventListener("DOMContentLoaded", boot)
