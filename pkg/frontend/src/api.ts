// Typed client for the session service. Every method is a thin wrapper over
// one endpoint; bodies mirror the server's domain types field for field.

export interface PersonaPayload {
  name: string
  epithet: string
  speaking_label: string
}

export interface ScenarioSpecPayload {
  title: string
  setting: string
  topical_brief: string
  props: string[]
  personae: PersonaPayload[]
  opening_direction: string
  formatting_directives: string[]
}

export interface TurnPayload {
  index: number
  origin: "operator" | "model"
  text: string
  speaker_labels: string[]
}

export interface SessionHandle {
  session_id: string
  created_at: string
}

export interface StructuredTranscript {
  status: string
  turns: TurnPayload[]
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message)
  }
}

async function readError(response: Response): Promise<ApiError> {
  let message = `HTTP ${response.status}`
  try {
    const body = await response.json()
    if (body && typeof body.error === "string") {
      message = body.error
    }
  } catch {
    // non-JSON error body; keep the status line
  }
  return new ApiError(response.status, message)
}

export class ScenarioApi {
  constructor(private baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path
  }

  async createSession(spec: ScenarioSpecPayload): Promise<SessionHandle> {
    const response = await fetch(this.url("/sessions"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ scenario_spec: spec }),
    })
    if (response.status !== 201) throw await readError(response)
    return response.json()
  }

  async nudge(sessionId: string, text: string): Promise<TurnPayload> {
    const response = await fetch(this.url(`/sessions/${sessionId}/nudge`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text }),
    })
    if (!response.ok) throw await readError(response)
    return response.json()
  }

  async continueSession(sessionId: string): Promise<TurnPayload> {
    const response = await fetch(this.url(`/sessions/${sessionId}/continue`), {
      method: "POST",
    })
    if (!response.ok) throw await readError(response)
    return response.json()
  }

  async stopSession(sessionId: string): Promise<{ status: string }> {
    const response = await fetch(this.url(`/sessions/${sessionId}/stop`), { method: "POST" })
    if (!response.ok) throw await readError(response)
    return response.json()
  }

  // Raw export, exactly as the server produced it.
  async transcript(sessionId: string, format: "plain" | "structured"): Promise<string> {
    const response = await fetch(
      this.url(`/sessions/${sessionId}/transcript?format=${format}`),
    )
    if (!response.ok) throw await readError(response)
    return response.text()
  }

  async structuredTranscript(sessionId: string): Promise<StructuredTranscript> {
    const text = await this.transcript(sessionId, "structured")
    return JSON.parse(text)
  }
}
