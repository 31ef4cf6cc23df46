#include "dbgorilla/catalog.hpp"

#include <algorithm>
#include <cctype>

namespace dbgorilla {

void ValueCatalog::set(const std::string& collection, const std::string& property,
                       PropertyValues values) {
    values_[collection + "." + property] = std::move(values);
}

void ValueCatalog::set_search_topics(const std::string& collection, std::vector<std::string> topics) {
    topics_[collection] = std::move(topics);
}

PropertyValues ValueCatalog::lookup(const std::string& collection, const PropertySchema& property) const {
    if (auto it = values_.find(collection + "." + property.name); it != values_.end()) return it->second;
    PropertyValues v;
    switch (property.data_type) {
        case DataType::Number:
            v.min = 1;
            v.max = 100;
            v.step = 1;
            break;
        case DataType::Boolean:
            break;
        case DataType::Text:
            if (property.searchable) {
                v.samples = {"bright modern space with friendly staff",
                             "quiet classic option with a loyal following",
                             "popular seasonal choice with great reviews",
                             "budget friendly pick near the city center",
                             "premium experience with attentive service",
                             "family oriented offering with flexible hours"};
            } else {
                v.samples = {"Alpha", "Bravo", "Charlie", "Delta", "Echo", "Foxtrot", "Golf", "Hotel"};
            }
            break;
    }
    return v;
}

std::vector<std::string> ValueCatalog::search_topics(const std::string& collection) const {
    if (auto it = topics_.find(collection); it != topics_.end()) return it->second;
    return {"friendly staff", "seasonal choice", "great reviews", "attentive service", "city center"};
}

namespace {

struct PropSpec {
    std::string name;
    DataType type;
    std::string description;
    bool searchable;
    PropertyValues values;
};

struct CollectionSpec {
    std::string name;
    std::vector<PropSpec> properties;
    std::vector<std::string> topics;
};

PropertyValues numbers(double min, double max, double step) { return {min, max, step, {}}; }
PropertyValues texts(std::vector<std::string> samples) { return {0, 0, 1, std::move(samples)}; }
PropertyValues flags() { return {}; }

BuiltinDomain make_domain(std::string name, std::string overview, std::vector<CollectionSpec> specs) {
    BuiltinDomain d;
    d.use_case.name = std::move(name);
    d.use_case.use_case_overview = std::move(overview);
    for (auto& spec : specs) {
        CollectionSchema c;
        c.name = spec.name;
        for (auto& p : spec.properties) {
            c.properties.push_back({p.name, p.type, p.description, p.searchable});
            d.catalog.set(spec.name, p.name, std::move(p.values));
        }
        d.catalog.set_search_topics(spec.name, std::move(spec.topics));
        d.use_case.collections.push_back(std::move(c));
    }
    validate_use_case(d.use_case);
    return d;
}

using T = DataType;

std::vector<BuiltinDomain> make_builtins() {
    std::vector<BuiltinDomain> out;

    out.push_back(make_domain(
        "restaurants",
        "A restaurant discovery and booking system connecting diners with local restaurants, "
        "their menus, and table reservations.",
        {{"Restaurants",
          {{"name", T::Text, "The name of the restaurant.", false,
            texts({"La Trattoria", "La Petite Maison", "Cafe Verde", "Golden Dragon", "Sakura House",
                   "The Rustic Spoon", "Bistro Luna", "Cafe Milano"})},
           {"description", T::Text,
            "A detailed description of the restaurant, including cuisine, ambiance, and signature dishes.",
            true,
            texts({"cozy Italian trattoria with a romantic ambiance and handmade pasta",
                   "trendy vegan brunch spot with outdoor seating",
                   "romantic dinner setting with live jazz music on weekends",
                   "family friendly Asian restaurant with a cozy atmosphere",
                   "upscale French bistro known for seasonal tasting menus",
                   "casual cafe serving organic coffee and healthy salads"})},
           {"averageRating", T::Number, "The average customer rating from 1 to 5.", false,
            numbers(1, 5, 0.5)},
           {"openNow", T::Boolean, "Whether the restaurant is currently open.", false, flags()}},
          {"cozy italian", "romantic dinner", "vegan brunch", "live jazz", "outdoor seating"}},
         {"Menus",
          {{"menuItem", T::Text, "The name of the menu item.", false,
            texts({"Margherita Pizza", "Caesar Salad", "Mushroom Risotto", "Pad Thai", "Veggie Burger",
                   "Grilled Salmon", "Tiramisu", "Falafel Wrap"})},
           {"itemDescription", T::Text,
            "A description of the dish, its ingredients, and how it is prepared.", true,
            texts({"seasonal specialty with roasted vegetables and herbs",
                   "classic dish made with fresh tomatoes and basil",
                   "healthy salad with organic greens and citrus dressing",
                   "spicy noodles tossed with peanuts and lime",
                   "rich dessert layered with espresso and mascarpone",
                   "grilled fish served with seasonal vegetables"})},
           {"price", T::Number, "The price of the menu item in US dollars.", false, numbers(5, 60, 1)},
           {"isVegetarian", T::Boolean, "Whether the menu item is vegetarian.", false, flags()}},
          {"seasonal specialties", "healthy salad", "spicy noodles", "fresh tomatoes", "dessert"}},
         {"Reservations",
          {{"reservationName", T::Text, "The name under which the reservation was made.", false,
            texts({"Smith", "Garcia", "Chen", "Patel", "Johnson", "Kim", "Rossi", "Okafor"})},
           {"notes", T::Text, "Special requests or notes attached to the reservation.", true,
            texts({"birthday celebration, window table requested",
                   "anniversary dinner, quiet corner please",
                   "high chair needed for a toddler",
                   "guest has a severe nut allergy",
                   "business dinner, private room preferred",
                   "vegetarian options requested for the whole party"})},
           {"partySize", T::Number, "The number of people in the party.", false, numbers(1, 12, 1)},
           {"confirmed", T::Boolean, "Whether the reservation has been confirmed.", false, flags()}},
          {"birthday celebration", "anniversary dinner", "nut allergy", "private room", "window table"}}}));

    out.push_back(make_domain(
        "health_clinics",
        "A healthcare network directory covering clinics, the doctors who practice there, and "
        "patient appointments.",
        {{"Clinics",
          {{"clinicName", T::Text, "The name of the clinic.", false,
            texts({"Riverside Health", "Northside Family Care", "Summit Orthopedics", "Harbor Medical",
                   "Lakeview Pediatrics", "Oak Street Clinic"})},
           {"services", T::Text, "The medical services and specialties the clinic provides.", true,
            texts({"orthopedic care and sports injury rehabilitation",
                   "pediatric checkups and childhood vaccinations",
                   "family medicine with same day appointments",
                   "cardiology screenings and heart health programs",
                   "dermatology treatments and skin cancer screening",
                   "physical therapy and chronic pain management"})},
           {"patientSatisfaction", T::Number, "Average patient satisfaction score from 1 to 5.", false,
            numbers(1, 5, 0.5)},
           {"acceptingNewPatients", T::Boolean, "Whether the clinic is accepting new patients.", false,
            flags()}},
          {"orthopedic care", "pediatric checkups", "heart health", "physical therapy", "family medicine"}},
         {"Doctors",
          {{"specialty", T::Text, "The doctor's primary medical specialty.", false,
            texts({"Cardiology", "Pediatrics", "Orthopedics", "Dermatology", "Family Medicine",
                   "Neurology"})},
           {"biography", T::Text, "A short professional biography of the doctor.", true,
            texts({"board certified surgeon focused on minimally invasive procedures",
                   "pediatrician passionate about preventive care",
                   "sports medicine specialist who treats athletes",
                   "researcher studying heart disease prevention",
                   "family doctor known for a calm bedside manner",
                   "neurologist specializing in migraine treatment"})},
           {"yearsOfExperience", T::Number, "Years the doctor has been practicing.", false,
            numbers(1, 40, 1)},
           {"currentlyPracticing", T::Boolean, "Whether the doctor is currently practicing.", false,
            flags()}},
          {"preventive care", "sports medicine", "heart disease", "migraine treatment", "bedside manner"}},
         {"Appointments",
          {{"patientName", T::Text, "The name of the patient.", false,
            texts({"Alex Morgan", "Jordan Lee", "Sam Rivera", "Taylor Brooks", "Casey Nguyen",
                   "Riley Adams"})},
           {"visitNotes", T::Text, "Notes describing the reason for the visit.", true,
            texts({"annual physical with routine blood work",
                   "follow up visit for knee pain after surgery",
                   "seasonal allergy symptoms and congestion",
                   "vaccination appointment for a school requirement",
                   "consultation about persistent headaches",
                   "skin rash evaluation and treatment plan"})},
           {"durationMinutes", T::Number, "The scheduled length of the appointment in minutes.", false,
            numbers(10, 90, 5)},
           {"followUpRequired", T::Boolean, "Whether a follow-up appointment is required.", false,
            flags()}},
          {"knee pain", "annual physical", "allergy symptoms", "persistent headaches", "skin rash"}}}));

    out.push_back(make_domain(
        "courses",
        "An online learning platform with courses, the instructors who teach them, and student "
        "enrollments.",
        {{"Courses",
          {{"courseTitle", T::Text, "The title of the course.", false,
            texts({"Intro to Data Science", "Modern Poetry", "Linear Algebra", "Web Development",
                   "Organic Chemistry", "Digital Photography"})},
           {"courseDescription", T::Text, "A description of the course content and learning goals.", true,
            texts({"hands on introduction to machine learning with python projects",
                   "survey of twentieth century poetry and creative writing",
                   "vectors, matrices and applications in computer graphics",
                   "build responsive websites with javascript and css",
                   "laboratory course covering organic reactions",
                   "composition and lighting techniques for beginners"})},
           {"credits", T::Number, "The number of credits awarded for the course.", false, numbers(1, 6, 1)},
           {"isOnline", T::Boolean, "Whether the course is offered online.", false, flags()}},
          {"machine learning", "creative writing", "computer graphics", "responsive websites", "lighting"}},
         {"Instructors",
          {{"instructorName", T::Text, "The name of the instructor.", false,
            texts({"Dr. Ada Park", "Prof. Luis Ortega", "Dr. Mei Tanaka", "Prof. Sarah Cole",
                   "Dr. Omar Haddad", "Prof. Nina Berg"})},
           {"researchInterests", T::Text, "The instructor's research interests and expertise.", true,
            texts({"natural language processing and machine learning",
                   "renaissance literature and poetry translation",
                   "numerical methods and optimization",
                   "human computer interaction and web accessibility",
                   "green chemistry and sustainable materials",
                   "documentary photography and visual storytelling"})},
           {"yearsTeaching", T::Number, "Years the instructor has been teaching.", false, numbers(1, 35, 1)},
           {"isTenured", T::Boolean, "Whether the instructor holds tenure.", false, flags()}},
          {"machine learning", "poetry translation", "optimization", "web accessibility", "storytelling"}},
         {"Enrollments",
          {{"studentName", T::Text, "The name of the enrolled student.", false,
            texts({"Priya Shah", "Diego Alvarez", "Emma Wilson", "Kenji Sato", "Fatima Noor",
                   "Lucas Martin"})},
           {"feedback", T::Text, "The student's written feedback about the course.", true,
            texts({"engaging lectures and very helpful office hours",
                   "assignments were challenging but rewarding",
                   "would like more practical examples",
                   "excellent pacing and clear explanations",
                   "group projects were the highlight of the course",
                   "too much reading for the time available"})},
           {"grade", T::Number, "The student's final grade out of 100.", false, numbers(40, 100, 1)},
           {"completed", T::Boolean, "Whether the student completed the course.", false, flags()}},
          {"office hours", "practical examples", "clear explanations", "group projects", "challenging"}}}));

    out.push_back(make_domain(
        "travel_planning",
        "A travel planning service covering destinations, hotels, and curated multi-day itineraries.",
        {{"Destinations",
          {{"destinationName", T::Text, "The name of the destination.", false,
            texts({"Lisbon", "Kyoto", "Cape Town", "Reykjavik", "Cusco", "Santorini"})},
           {"highlights", T::Text, "Key attractions and experiences at the destination.", true,
            texts({"historic old town with tiled streets and seafood restaurants",
                   "ancient temples, tea ceremonies and autumn foliage",
                   "dramatic coastline, wineries and mountain hikes",
                   "northern lights, hot springs and glacier tours",
                   "gateway to mountain ruins with colorful markets",
                   "white cliffs, sunsets and beaches"})},
           {"averageDailyCost", T::Number, "Typical daily spend per traveler in US dollars.", false,
            numbers(40, 400, 10)},
           {"visaRequired", T::Boolean, "Whether most travelers need a visa.", false, flags()}},
          {"northern lights", "ancient temples", "mountain hikes", "old town", "beaches"}},
         {"Hotels",
          {{"hotelName", T::Text, "The name of the hotel.", false,
            texts({"Hotel Azul", "The Grand Kyoto", "Seaside Inn", "Mountain Lodge", "Casa Blanca",
                   "Harbor View Suites"})},
           {"amenities", T::Text, "Amenities and services offered by the hotel.", true,
            texts({"rooftop pool, spa and free breakfast",
                   "traditional rooms with an onsite hot spring",
                   "ocean view rooms and a beachfront bar",
                   "ski storage, fireplace lounge and shuttle service",
                   "boutique rooms with a courtyard garden",
                   "business center, gym and airport transfers"})},
           {"nightlyRate", T::Number, "The nightly room rate in US dollars.", false, numbers(50, 600, 10)},
           {"hasPool", T::Boolean, "Whether the hotel has a swimming pool.", false, flags()}},
          {"free breakfast", "hot spring", "ocean view", "airport transfers", "courtyard garden"}},
         {"Itineraries",
          {{"tripTitle", T::Text, "The title of the itinerary.", false,
            texts({"Coastal Escape", "Temple Trail", "Wine Country Loop", "Arctic Adventure",
                   "Andes Explorer", "Island Hopper"})},
           {"dayByDayPlan", T::Text, "A day by day description of the planned activities.", true,
            texts({"city walking tour followed by a sunset sailing trip",
                   "guided temple visits and a cooking class",
                   "vineyard tastings and a scenic coastal drive",
                   "glacier hike and northern lights hunt",
                   "trek to mountain ruins with local guides",
                   "ferry rides between islands and beach days"})},
           {"durationDays", T::Number, "The length of the itinerary in days.", false, numbers(2, 21, 1)},
           {"isGuided", T::Boolean, "Whether the itinerary includes a tour guide.", false, flags()}},
          {"cooking class", "walking tour", "glacier hike", "beach days", "vineyard tastings"}}}));

    out.push_back(make_domain(
        "visual_art",
        "A visual arts guide cataloguing museums, individual art pieces, and exhibitions.",
        {{"Museums",
          {{"museumName", T::Text, "The name of the museum.", false,
            texts({"Modern Art Museum", "City History Museum", "Gallery of Light", "The Sculpture Hall",
                   "Harborfront Gallery", "National Portrait House"})},
           {"exhibitHighlights", T::Text, "Notable exhibits and collections at the museum.", true,
            texts({"impressionist paintings and a renaissance sculpture wing",
                   "notable historical exhibits on the industrial revolution",
                   "contemporary photography and video installations",
                   "ancient pottery and bronze age artifacts",
                   "portrait collection spanning five centuries",
                   "interactive digital art for all ages"})},
           {"entryFee", T::Number, "The standard adult entry fee in US dollars.", false, numbers(0, 40, 1)},
           {"openToday", T::Boolean, "Whether the museum is open today.", false, flags()}},
          {"historical exhibits", "impressionist paintings", "digital art", "photography", "pottery"}},
         {"ArtPieces",
          {{"artistName", T::Text, "The name of the artist who created the piece.", false,
            texts({"Claude Monet", "Frida Kahlo", "Yayoi Kusama", "Jean-Michel Basquiat",
                   "Georgia O'Keeffe", "Hokusai"})},
           {"pieceDescription", T::Text, "A description of the art piece, its medium and history.", true,
            texts({"oil painting of water lilies at dawn",
                   "self portrait with vivid colors and symbolism",
                   "immersive installation of mirrored polka dots",
                   "neo expressionist canvas with bold street art text",
                   "large scale flower painting in soft tones",
                   "woodblock print of a great ocean wave"})},
           {"marketValuation", T::Number, "Estimated market value in millions of US dollars.", false,
            numbers(1, 120, 1)},
           {"onDisplay", T::Boolean, "Whether the piece is currently on display.", false, flags()}},
          {"water lilies", "self portrait", "polka dots", "street art", "woodblock print"}},
         {"Exhibitions",
          {{"exhibitionTitle", T::Text, "The title of the exhibition.", false,
            texts({"Light and Shadow", "Voices of the Past", "New Horizons", "Color Theory",
                   "The Human Form", "Waves"})},
           {"exhibitionDescription", T::Text, "A description of the exhibition's theme and works.", true,
            texts({"retrospective of impressionist landscapes",
                   "historical artifacts from ancient civilizations",
                   "emerging artists working with digital media",
                   "study of color in abstract painting",
                   "sculpture and photography exploring the human body",
                   "japanese prints inspired by the sea"})},
           {"visitorCount", T::Number, "Total visitors so far, in thousands.", false, numbers(1, 500, 1)},
           {"currentlyRunning", T::Boolean, "Whether the exhibition is currently running.", false,
            flags()}},
          {"impressionist landscapes", "ancient civilizations", "digital media", "abstract painting",
           "japanese prints"}}}));

    return out;
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace

const std::vector<BuiltinDomain>& builtin_domains() {
    static const std::vector<BuiltinDomain> domains = make_builtins();
    return domains;
}

const BuiltinDomain* find_builtin_domain(std::string_view hint) {
    const std::string needle = lower(hint);
    if (needle.empty()) return nullptr;
    for (const auto& d : builtin_domains()) {
        const std::string name = lower(d.use_case.name);
        if (name == needle || name.starts_with(needle) || needle.starts_with(name)) return &d;
        // "restaurant" matches "restaurants", "health" matches "health_clinics".
        std::string stem = name.substr(0, name.find('_'));
        if (!stem.empty() && stem.back() == 's') stem.pop_back();
        if (needle.find(stem) != std::string::npos) return &d;
    }
    return nullptr;
}

const ValueCatalog& catalog_for(const UseCase& use_case) {
    static const ValueCatalog empty;
    for (const auto& d : builtin_domains())
        if (d.use_case.name == use_case.name && d.use_case == use_case) return d.catalog;
    return empty;
}

}  // namespace dbgorilla
